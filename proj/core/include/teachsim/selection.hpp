#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teachsim/core.hpp"
#include "teachsim/envs.hpp"
#include "teachsim/reward_model.hpp"
#include "teachsim/rng.hpp"
#include "teachsim/teachers.hpp"

namespace teachsim {

struct PoolEntry {
  Query query;
  Vec g1;  // map_segment(query.first)
  Vec g2;  // map_segment(query.second)
  std::size_t first_index = 0;   // position of query.first in the source segments
  std::size_t second_index = 0;
};

struct QueryPool {
  std::vector<PoolEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const PoolEntry& operator[](std::size_t i) const { return entries[i]; }
};

// pool_size queries, each pairing two distinct segments drawn uniformly.
// Pairs may repeat across queries. Throws ContractViolation with fewer than
// two segments.
QueryPool build_pool(const EnvSpec& spec, std::span<const Segment> segments, int pool_size,
                     RngStream& rng);

double similarity_distance(const PoolEntry& entry);

enum class SamplingStrategy { kUniform, kDisagreement, kSimilarity, kHybrid };
enum class TeacherStrategy { kUniform, kMaxBeta };

// Config and CLI tokens: uniform | disagreement | similarity | hybrid and
// uniform | max_beta. Parsing throws std::invalid_argument on anything else.
std::string_view to_string(SamplingStrategy s);
std::string_view to_string(TeacherStrategy s);
SamplingStrategy parse_sampling_strategy(std::string_view token);
TeacherStrategy parse_teacher_strategy(std::string_view token);

std::vector<double> disagreement_scores(const QueryPool& pool, const RewardEnsemble& ensemble);
std::vector<double> similarity_distances(const QueryPool& pool);

// Min-max normalized disagreement minus normalized distance. A constant
// input normalizes to all zeros.
std::vector<double> hybrid_scores(std::span<const double> disagreements,
                                  std::span<const double> distances);

// Chooses n pool indices from precomputed scores; the score vectors may be
// empty when the strategy does not read them. Ties go to the lower index.
std::vector<std::size_t> select_by_scores(SamplingStrategy strategy, std::size_t pool_size,
                                          std::span<const double> disagreements,
                                          std::span<const double> distances, std::size_t n,
                                          RngStream& rng);

// Returns the selected pool indices. Throws ContractViolation if n exceeds
// the pool size.
std::vector<std::size_t> select_queries(const QueryPool& pool, SamplingStrategy strategy,
                                        std::size_t n, const RewardEnsemble& ensemble,
                                        RngStream& rng);

// Highest-beta teacher, lowest id on ties. Uses the true kernels, which only
// the simulator can see.
int argmax_beta_teacher(const TeacherSet& teachers, std::span<const double> g1,
                        std::span<const double> g2);

int select_teacher(const TeacherSet& teachers, std::span<const double> g1,
                   std::span<const double> g2, TeacherStrategy strategy, RngStream& rng);
int select_teacher(const TeacherSet& teachers, const Query& query, TeacherStrategy strategy,
                   const EnvSpec& spec, RngStream& rng);

}  // namespace teachsim
