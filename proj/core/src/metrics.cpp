#include "teachsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "teachsim/core.hpp"

namespace teachsim {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename Int>
Int to_int(const std::string& text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not an integer: '" + text + "'");
  }
  return value;
}

}  // namespace

void write_csv(std::ostream& out, const RunMetrics& metrics) {
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : metrics.rows) {
    out << r.seed << ',' << r.env_step << ',' << format_double(r.ground_truth_return) << ','
        << format_double(r.reward_model_loss) << ',' << format_double(r.mean_selected_beta) << ','
        << format_double(r.inter_domain_fraction) << ',' << format_double(r.disagreement_mean)
        << '\n';
  }
}

RunMetrics read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error("metrics csv: unexpected header");
  }
  RunMetrics metrics;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw std::runtime_error("metrics csv: expected 7 fields in '" + line + "'");
    metrics.rows.push_back({to_int<std::uint64_t>(f[0]), to_int<long>(f[1]), parse_double(f[2]),
                            parse_double(f[3]), parse_double(f[4]), parse_double(f[5]),
                            parse_double(f[6])});
  }
  return metrics;
}

void emit_csv(const RunMetrics& metrics, const std::string& path) {
  if (metrics.rows.empty()) throw std::invalid_argument("emit_csv: no metrics rows");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, metrics);
  if (!out) throw std::runtime_error("failed writing " + path);
}

RunMetrics load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

double final_return(const RunMetrics& metrics, int last_rows) {
  if (metrics.rows.empty() || last_rows < 1) throw std::invalid_argument("final_return: no rows");
  const std::size_t n = std::min(metrics.rows.size(), static_cast<std::size_t>(last_rows));
  double total = 0.0;
  for (std::size_t i = metrics.rows.size() - n; i < metrics.rows.size(); ++i) {
    total += metrics.rows[i].ground_truth_return;
  }
  return total / static_cast<double>(n);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of no values");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_stddev(std::span<const double> values) {
  const double m = mean(values);
  double sq = 0.0;
  for (double v : values) sq += (v - m) * (v - m);
  return std::sqrt(sq / static_cast<double>(values.size()));
}

std::vector<AggregateRow> aggregate(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate needs at least one run");
  const auto& grid = runs.front().rows;
  for (const RunMetrics& run : runs) {
    if (run.rows.size() != grid.size()) throw std::invalid_argument("runs have different evaluation grids");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (run.rows[i].env_step != grid[i].env_step) {
        throw std::invalid_argument("runs have different evaluation grids");
      }
    }
  }
  std::vector<AggregateRow> out;
  std::vector<double> values(runs.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Sorting makes the floating-point sum independent of run order.
    for (std::size_t r = 0; r < runs.size(); ++r) values[r] = runs[r].rows[i].ground_truth_return;
    std::sort(values.begin(), values.end());
    out.push_back({grid[i].env_step, mean(values), population_stddev(values), runs.size()});
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "env_step,mean,stddev,runs\n";
  for (const AggregateRow& r : rows) {
    out << r.env_step << ',' << format_double(r.mean) << ',' << format_double(r.stddev) << ','
        << r.runs << '\n';
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "env_step,mean,stddev,runs") {
    throw std::runtime_error("aggregate csv: unexpected header");
  }
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw std::runtime_error("aggregate csv: expected 4 fields");
    rows.push_back({to_int<long>(f[0]), parse_double(f[1]), parse_double(f[2]), to_int<std::size_t>(f[3])});
  }
  return rows;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_plot(std::ostream& out, std::span<const PlotSeries> series, const std::string& title) {
  if (series.empty()) throw std::invalid_argument("write_plot: no series");
  constexpr double width = 720, height = 440, left = 70, right = 190, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_max = 1.0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const PlotSeries& s : series) {
    for (const AggregateRow& r : s.rows) {
      x_max = std::max(x_max, static_cast<double>(r.env_step));
      y_min = std::min(y_min, r.mean - r.stddev);
      y_max = std::max(y_max, r.mean + r.stddev);
    }
  }
  if (!std::isfinite(y_min)) y_min = 0.0, y_max = 1.0;
  if (y_max - y_min < 1e-9) y_max = y_min + 1.0;
  const auto px = [&](double x) { return left + plot_w * x / x_max; };
  const auto py = [&](double y) { return top + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };
  const auto num = [](double v) { return format_double(std::round(v * 100.0) / 100.0); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" << escape_xml(title) << "</text>\n";
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_max * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    out << "<text x=\"" << num(px(xv)) << "\" y=\"" << top + plot_h + 16
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">environment steps</text>\n</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& rows = series[s].rows;
    const char* colour = kPalette[s % std::size(kPalette)];
    if (!rows.empty()) {
      out << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (const AggregateRow& r : rows) out << num(px(r.env_step)) << ',' << num(py(r.mean + r.stddev)) << ' ';
      for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        out << num(px(it->env_step)) << ',' << num(py(it->mean - it->stddev)) << ' ';
      }
      out << "\"/>\n";
      out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
      for (const AggregateRow& r : rows) out << num(px(r.env_step)) << ',' << num(py(r.mean)) << ' ';
      out << "\"/>\n";
    }
    const double ly = top + 14 + 20.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"3\"/>\n";
    out << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[s].label) << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_plot(std::span<const PlotSeries> series, const std::string& path, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_plot(out, series, title);
}

WelchResult welch_one_sided(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs two samples per group");
  const double ma = mean(a), mb = mean(b);
  auto sample_var = [](std::span<const double> v, double m) {
    double sq = 0.0;
    for (double x : v) sq += (x - m) * (x - m);
    return sq / static_cast<double>(v.size() - 1);
  };
  const double va = sample_var(a, ma) / static_cast<double>(a.size());
  const double vb = sample_var(b, mb) / static_cast<double>(b.size());
  WelchResult r;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    r.t = ma > mb ? std::numeric_limits<double>::infinity() : (ma < mb ? -std::numeric_limits<double>::infinity() : 0.0);
    r.dof = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = ma > mb ? 0.0 : (ma < mb ? 1.0 : 0.5);
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs paired samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace teachsim
