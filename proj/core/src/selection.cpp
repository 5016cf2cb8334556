#include "teachsim/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace teachsim {

QueryPool build_pool(const EnvSpec& spec, std::span<const Segment> segments, int pool_size,
                     RngStream& rng) {
  if (segments.size() < 2) throw ContractViolation("build_pool needs at least two segments");
  if (pool_size < 0) throw ContractViolation("pool_size must be non-negative");
  std::vector<Vec> g(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) g[i] = map_segment(spec, segments[i]);

  const int n = static_cast<int>(segments.size());
  QueryPool pool;
  pool.entries.reserve(static_cast<std::size_t>(pool_size));
  for (int q = 0; q < pool_size; ++q) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(n));
    auto j = static_cast<std::size_t>(rng.uniform_int(n - 1));
    if (j >= i) ++j;
    pool.entries.push_back({Query(segments[i], segments[j]), g[i], g[j], i, j});
  }
  return pool;
}

double similarity_distance(const PoolEntry& entry) {
  if (entry.g1.size() != entry.g2.size()) throw ContractViolation("g-vector dimensions differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < entry.g1.size(); ++i) {
    const double d = entry.g1[i] - entry.g2[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::string_view to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::kUniform: return "uniform";
    case SamplingStrategy::kDisagreement: return "disagreement";
    case SamplingStrategy::kSimilarity: return "similarity";
    case SamplingStrategy::kHybrid: return "hybrid";
  }
  return "?";
}

std::string_view to_string(TeacherStrategy s) {
  switch (s) {
    case TeacherStrategy::kUniform: return "uniform";
    case TeacherStrategy::kMaxBeta: return "max_beta";
  }
  return "?";
}

SamplingStrategy parse_sampling_strategy(std::string_view token) {
  for (auto s : {SamplingStrategy::kUniform, SamplingStrategy::kDisagreement,
                 SamplingStrategy::kSimilarity, SamplingStrategy::kHybrid}) {
    if (token == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown sampling strategy '" + std::string(token) +
                              "' (expected uniform|disagreement|similarity|hybrid)");
}

TeacherStrategy parse_teacher_strategy(std::string_view token) {
  for (auto s : {TeacherStrategy::kUniform, TeacherStrategy::kMaxBeta}) {
    if (token == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown teacher strategy '" + std::string(token) +
                              "' (expected uniform|max_beta)");
}

std::vector<double> disagreement_scores(const QueryPool& pool, const RewardEnsemble& ensemble) {
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const PoolEntry& e : pool.entries) scores.push_back(disagreement_score(ensemble, e.query));
  return scores;
}

std::vector<double> similarity_distances(const QueryPool& pool) {
  std::vector<double> d;
  d.reserve(pool.size());
  for (const PoolEntry& e : pool.entries) d.push_back(similarity_distance(e));
  return d;
}

namespace {

std::vector<double> min_max(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

// Indices of the n largest scores; stable so equal scores keep index order.
std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(n);
  return idx;
}

}  // namespace

std::vector<double> hybrid_scores(std::span<const double> disagreements,
                                  std::span<const double> distances) {
  if (disagreements.size() != distances.size()) {
    throw ContractViolation("hybrid_scores needs equally sized score vectors");
  }
  const auto d = min_max(disagreements);
  const auto s = min_max(distances);
  std::vector<double> score(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) score[i] = d[i] - s[i];
  return score;
}

std::vector<std::size_t> select_by_scores(SamplingStrategy strategy, std::size_t pool_size,
                                          std::span<const double> disagreements,
                                          std::span<const double> distances, std::size_t n,
                                          RngStream& rng) {
  if (n > pool_size) {
    throw ContractViolation("cannot select " + std::to_string(n) + " queries from a pool of " +
                            std::to_string(pool_size));
  }
  auto check = [&](std::span<const double> v, const char* what) {
    if (v.size() != pool_size) throw ContractViolation(std::string(what) + " scores missing");
  };
  switch (strategy) {
    case SamplingStrategy::kUniform: {
      // Partial Fisher-Yates: n draws without replacement.
      std::vector<std::size_t> idx(pool_size);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < n; ++i) {
        const auto pick = i + static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool_size - i)));
        std::swap(idx[i], idx[pick]);
      }
      idx.resize(n);
      return idx;
    }
    case SamplingStrategy::kDisagreement:
      check(disagreements, "disagreement");
      return top_n(disagreements, n);
    case SamplingStrategy::kSimilarity: {
      check(distances, "distance");
      std::vector<double> negated(distances.begin(), distances.end());
      for (double& x : negated) x = -x;
      return top_n(negated, n);
    }
    case SamplingStrategy::kHybrid:
      check(disagreements, "disagreement");
      check(distances, "distance");
      return top_n(hybrid_scores(disagreements, distances), n);
  }
  return {};
}

std::vector<std::size_t> select_queries(const QueryPool& pool, SamplingStrategy strategy,
                                        std::size_t n, const RewardEnsemble& ensemble,
                                        RngStream& rng) {
  std::vector<double> dis;
  std::vector<double> dist;
  if (strategy == SamplingStrategy::kDisagreement || strategy == SamplingStrategy::kHybrid) {
    dis = disagreement_scores(pool, ensemble);
  }
  if (strategy == SamplingStrategy::kSimilarity || strategy == SamplingStrategy::kHybrid) {
    dist = similarity_distances(pool);
  }
  return select_by_scores(strategy, pool.size(), dis, dist, n, rng);
}

int argmax_beta_teacher(const TeacherSet& teachers, std::span<const double> g1,
                        std::span<const double> g2) {
  int best = 0;
  double best_beta = beta_value(teachers[0], g1, g2);
  for (std::size_t i = 1; i < teachers.size(); ++i) {
    const double b = beta_value(teachers[i], g1, g2);
    if (b > best_beta) {
      best_beta = b;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int select_teacher(const TeacherSet& teachers, std::span<const double> g1,
                   std::span<const double> g2, TeacherStrategy strategy, RngStream& rng) {
  switch (strategy) {
    case TeacherStrategy::kUniform:
      return rng.uniform_int(static_cast<int>(teachers.size()));
    case TeacherStrategy::kMaxBeta:
      return argmax_beta_teacher(teachers, g1, g2);
  }
  return 0;
}

int select_teacher(const TeacherSet& teachers, const Query& query, TeacherStrategy strategy,
                   const EnvSpec& spec, RngStream& rng) {
  return select_teacher(teachers, map_segment(spec, query.first), map_segment(spec, query.second),
                        strategy, rng);
}

}  // namespace teachsim
