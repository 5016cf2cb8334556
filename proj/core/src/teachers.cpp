#include "teachsim/teachers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace teachsim {

BetaKernel::BetaKernel(Vec center, Vec width, double scale)
    : center_(std::move(center)), width_(std::move(width)), scale_(scale) {
  if (center_.empty() || center_.size() % 2 != 0) {
    throw ContractViolation("kernel center must have 2 * g_dim entries");
  }
  if (width_.size() != center_.size()) {
    throw ContractViolation("kernel width and center dimensions differ");
  }
  if (!(scale_ > 0.0)) throw ContractViolation("kernel scale must be positive");
  for (double b : width_) {
    if (!(b >= 0.0)) throw ContractViolation("kernel widths must be non-negative");
  }
}

double BetaKernel::operator()(std::span<const double> g1, std::span<const double> g2) const {
  const std::size_t half = center_.size() / 2;
  if (g1.size() != half || g2.size() != half) {
    throw ContractViolation("g-vector dimension " + std::to_string(g1.size()) + "/" +
                            std::to_string(g2.size()) + " does not match kernel g_dim " +
                            std::to_string(half));
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < center_.size(); ++i) {
    const double x = i < half ? g1[i] : g2[i - half];
    const double z = width_[i] * (x - center_[i]);
    sq += z * z;
  }
  return scale_ * std::exp(-sq);
}

TeacherSet::TeacherSet(std::vector<Teacher> teachers) : teachers_(std::move(teachers)) {
  if (teachers_.empty()) throw ContractViolation("teacher set needs at least one teacher");
  for (std::size_t i = 0; i < teachers_.size(); ++i) {
    if (teachers_[i].id != static_cast<int>(i)) {
      throw ContractViolation("teacher ids must be 0..m-1 in order");
    }
    if (teachers_[i].kernel.g_dim() != teachers_[0].kernel.g_dim()) {
      throw ContractViolation("teachers disagree on g_dim");
    }
  }
}

double beta_value(const Teacher& teacher, std::span<const double> g1, std::span<const double> g2) {
  return teacher.kernel(g1, g2);
}

double pref_prob(double beta, double r1, double r2) {
  const double x1 = beta * r1;
  const double x2 = beta * r2;
  const double shift = std::max(x1, x2);
  const double e1 = std::exp(x1 - shift);
  const double e2 = std::exp(x2 - shift);
  return e1 / (e1 + e2);
}

double query_pref_prob(const Teacher& teacher, const Query& query, const RewardFn& ground_truth,
                       const EnvSpec& spec) {
  const Vec g1 = map_segment(spec, query.first);
  const Vec g2 = map_segment(spec, query.second);
  const double beta = beta_value(teacher, g1, g2);
  return pref_prob(beta, segment_return(query.first, ground_truth),
                   segment_return(query.second, ground_truth));
}

LabelDistribution sample_label(double p_first, RngStream& rng) {
  return rng.bernoulli(p_first) ? LabelDistribution::prefer_first()
                                : LabelDistribution::prefer_second();
}

LabelDistribution sample_label(const Teacher& teacher, const Query& query,
                               const RewardFn& ground_truth, const EnvSpec& spec, RngStream& rng) {
  return sample_label(query_pref_prob(teacher, query, ground_truth, spec), rng);
}

namespace {

std::vector<Vec> grid_points(int g_dim, int m) {
  std::vector<Vec> points;
  if (g_dim == 1) {
    for (int i = 0; i < m; ++i) points.push_back({(i + 0.5) / m});
    return points;
  }
  if (g_dim == 2) {
    int side = 1;
    while (side * side < m) ++side;
    for (int i = 0; i < m; ++i) {
      points.push_back({(i % side + 0.5) / side, (i / side + 0.5) / side});
    }
    return points;
  }
  throw ContractViolation("teacher grid supports g_dim 1 or 2");
}

}  // namespace

TeacherSet make_teacher_grid(int m, int g_dim, double scale, const Vec& width) {
  if (m < 1) throw ContractViolation("need at least one teacher");
  if (static_cast<int>(width.size()) != 2 * g_dim) {
    throw ContractViolation("width must have 2 * g_dim entries");
  }
  std::vector<Teacher> teachers;
  const auto points = grid_points(g_dim, m);
  for (int i = 0; i < m; ++i) {
    Vec center = points[i];
    center.insert(center.end(), points[i].begin(), points[i].end());
    teachers.push_back({i, BetaKernel(std::move(center), width, scale)});
  }
  return TeacherSet(std::move(teachers));
}

TeacherSet make_teacher_grid(int m, int g_dim, double scale, double uniform_width) {
  return make_teacher_grid(m, g_dim, scale, Vec(static_cast<std::size_t>(2 * g_dim), uniform_width));
}

TeacherSet make_constant_teachers(int m, int g_dim, double beta) {
  return make_teacher_grid(m, g_dim, beta, 0.0);
}

TeacherSet with_uniform_width(const TeacherSet& teachers, double width) {
  std::vector<Teacher> out;
  for (const Teacher& t : teachers) {
    out.push_back({t.id, BetaKernel(t.kernel.center(), Vec(t.kernel.width().size(), width),
                                    t.kernel.scale())});
  }
  return TeacherSet(std::move(out));
}

double min_coverage_beta(const TeacherSet& teachers, const EnvSpec& spec, int probe_points) {
  if (probe_points < 2) throw ContractViolation("min_coverage_beta needs at least 2 probe points");
  const int g_dim = spec.g_dim;
  if (teachers[0].kernel.g_dim() != g_dim) throw ContractViolation("teacher g_dim mismatch");
  long total = 1;
  for (int d = 0; d < g_dim; ++d) total *= probe_points;
  double worst = std::numeric_limits<double>::infinity();
  Vec t(static_cast<std::size_t>(g_dim));
  for (long flat = 0; flat < total; ++flat) {
    long rest = flat;
    for (int d = 0; d < g_dim; ++d) {
      t[d] = static_cast<double>(rest % probe_points) / (probe_points - 1);
      rest /= probe_points;
    }
    worst = std::min(worst, max_beta(teachers, t, t));
  }
  return worst;
}

Calibration calibrate_widths(const TeacherSet& teachers, const EnvSpec& spec, double beta_floor,
                             int probe_points) {
  double scale = 0.0;
  for (const Teacher& t : teachers) scale = std::max(scale, t.kernel.scale());
  if (!(beta_floor > 0.0)) throw InfeasibleCalibration("beta_floor must be positive");
  if (beta_floor > scale) {
    throw InfeasibleCalibration("beta_floor " + format_double(beta_floor) +
                                " exceeds the teachers' peak scale " + format_double(scale));
  }
  const auto coverage = [&](double w) {
    return min_coverage_beta(with_uniform_width(teachers, w), spec, probe_points);
  };

  double lo = 0.0;
  double hi = 1.0;
  if (coverage(0.0) < beta_floor) {
    throw InfeasibleCalibration("beta_floor unreachable even with zero width");
  }
  if (beta_floor < scale) {
    while (coverage(hi) >= beta_floor) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw InfeasibleCalibration("coverage never drops below beta_floor");
    }
    while (hi - lo > 1e-7 * hi) {
      const double mid = 0.5 * (lo + hi);
      (coverage(mid) >= beta_floor ? lo : hi) = mid;
    }
  }
  Calibration result;
  result.width = lo;
  result.widths.assign(static_cast<std::size_t>(2 * spec.g_dim), lo);
  result.beta_floor = beta_floor;
  result.min_coverage = coverage(lo);
  return result;
}

double max_beta(const TeacherSet& teachers, std::span<const double> g1, std::span<const double> g2) {
  double best = 0.0;
  for (const Teacher& t : teachers) best = std::max(best, beta_value(t, g1, g2));
  return best;
}

bool is_inter_domain(const TeacherSet& teachers, std::span<const double> g1,
                     std::span<const double> g2, double beta_floor) {
  return max_beta(teachers, g1, g2) < beta_floor;
}

}  // namespace teachsim
