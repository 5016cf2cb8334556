#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "teachsim/core.hpp"
#include "teachsim/envs.hpp"
#include "teachsim/rng.hpp"

namespace teachsim {

// Gaussian rationality kernel over the concatenated mapping [g(s1), g(s2)]:
//
//   beta(s1, s2) = scale * exp(-|| width .* ([g1, g2] - center) ||^2)
//
// `width` is a per-coordinate inverse length scale.
class BetaKernel {
 public:
  BetaKernel(Vec center, Vec width, double scale);

  const Vec& center() const { return center_; }
  const Vec& width() const { return width_; }
  double scale() const { return scale_; }
  int g_dim() const { return static_cast<int>(center_.size() / 2); }

  double operator()(std::span<const double> g1, std::span<const double> g2) const;

 private:
  Vec center_;
  Vec width_;
  double scale_;
};

struct Teacher {
  int id = 0;
  BetaKernel kernel;
};

class TeacherSet {
 public:
  explicit TeacherSet(std::vector<Teacher> teachers);

  std::size_t size() const { return teachers_.size(); }
  const Teacher& operator[](std::size_t i) const { return teachers_[i]; }
  auto begin() const { return teachers_.begin(); }
  auto end() const { return teachers_.end(); }

 private:
  std::vector<Teacher> teachers_;
};

double beta_value(const Teacher& teacher, std::span<const double> g1, std::span<const double> g2);

// Boltzmann preference for the first option, shifted by the larger logit.
double pref_prob(double beta, double r1, double r2);

double query_pref_prob(const Teacher& teacher, const Query& query, const RewardFn& ground_truth,
                       const EnvSpec& spec);

// Hard label: first segment preferred with probability query_pref_prob.
LabelDistribution sample_label(const Teacher& teacher, const Query& query,
                               const RewardFn& ground_truth, const EnvSpec& spec, RngStream& rng);
// Same draw when the preference probability is already known.
LabelDistribution sample_label(double p_first, RngStream& rng);

// m teachers with shared scale and width. For g_dim = 1 the centers sit on
// the diagonal at t_i = (i + 0.5) / m; for g_dim = 2 they are the first m
// cells of a ceil(sqrt(m))-per-side grid over [0, 1]^2, duplicated into both
// halves of the concatenated vector.
TeacherSet make_teacher_grid(int m, int g_dim, double scale, const Vec& width);
TeacherSet make_teacher_grid(int m, int g_dim, double scale, double uniform_width);

// Every teacher with a constant rationality `beta`.
TeacherSet make_constant_teachers(int m, int g_dim, double beta);

// Same centers and scale, new uniform width.
TeacherSet with_uniform_width(const TeacherSet& teachers, double width);

// Worst case over diagonal probes t of the best teacher's beta(t, t). Probes
// form a probe_points-per-axis uniform grid over [0, 1]^g_dim.
double min_coverage_beta(const TeacherSet& teachers, const EnvSpec& spec, int probe_points);

class InfeasibleCalibration : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Calibration {
  double width = 0.0;
  Vec widths;  // width repeated over 2 * g_dim coordinates
  double beta_floor = 0.0;
  double min_coverage = 0.0;
};

inline constexpr int kDefaultProbePoints = 201;

// Largest uniform width keeping min_coverage_beta >= beta_floor, found by
// bisection to relative tolerance 1e-6. beta_floor equal to the teachers'
// scale yields width 0; a floor above the scale has no solution.
Calibration calibrate_widths(const TeacherSet& teachers, const EnvSpec& spec, double beta_floor,
                             int probe_points = kDefaultProbePoints);

// Max beta over all teachers for the query's mapped segments.
double max_beta(const TeacherSet& teachers, std::span<const double> g1, std::span<const double> g2);

// Query outside every teacher's domain: max_i beta_i(s1, s2) < beta_floor.
bool is_inter_domain(const TeacherSet& teachers, std::span<const double> g1,
                     std::span<const double> g2, double beta_floor);

}  // namespace teachsim
