#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace teachsim {

// One evaluation point of a run. Session statistics (loss, selected beta,
// inter-domain fraction, disagreement) describe the most recent feedback
// session and are NaN before the first one.
struct MetricsRow {
  std::uint64_t seed = 0;
  long env_step = 0;
  double ground_truth_return = 0.0;
  double reward_model_loss = 0.0;
  double mean_selected_beta = 0.0;
  double inter_domain_fraction = 0.0;
  double disagreement_mean = 0.0;
};

struct RunMetrics {
  std::vector<MetricsRow> rows;  // ordered by env_step
};

inline constexpr const char* kMetricsHeader =
    "seed,env_step,ground_truth_return,reward_model_loss,mean_selected_beta,"
    "inter_domain_fraction,disagreement_mean";

void write_csv(std::ostream& out, const RunMetrics& metrics);
RunMetrics read_csv(std::istream& in);
// Throws std::invalid_argument for empty metrics, std::runtime_error when the
// file cannot be written.
void emit_csv(const RunMetrics& metrics, const std::string& path);
RunMetrics load_csv(const std::string& path);

// Mean of ground_truth_return over the last `last_rows` rows.
double final_return(const RunMetrics& metrics, int last_rows = 3);

struct AggregateRow {
  long env_step = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t runs = 0;
};

// Per-step mean and population std of ground_truth_return across runs.
// Throws std::invalid_argument if the runs do not share an evaluation grid.
std::vector<AggregateRow> aggregate(std::span<const RunMetrics> runs);

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

struct PlotSeries {
  std::string label;
  std::vector<AggregateRow> rows;
};

// SVG with one mean curve and a +/-1 std band per series.
void write_plot(std::ostream& out, std::span<const PlotSeries> series, const std::string& title);
void emit_plot(std::span<const PlotSeries> series, const std::string& path,
               const std::string& title = "ground-truth return");

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;  // one-sided, alternative mean(a) > mean(b)
};

WelchResult welch_one_sided(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> values);
double population_stddev(std::span<const double> values);

}  // namespace teachsim
