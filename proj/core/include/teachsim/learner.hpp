#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "teachsim/core.hpp"
#include "teachsim/envs.hpp"
#include "teachsim/reward_model.hpp"
#include "teachsim/rng.hpp"

namespace teachsim {

struct StoredTransition {
  Vec state;
  int action = 0;
  Vec next_state;
  double labeled_reward = 0.0;  // r_hat at store or last relabel time
};

// Fixed-capacity ring buffer. Stores model-predicted rewards only; there is
// no slot for ground truth.
class ReplayBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 50'000;

  explicit ReplayBuffer(std::size_t capacity = kDefaultCapacity);

  void add(StoredTransition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  // Storage order, not insertion order, once the ring wraps.
  const StoredTransition& operator[](std::size_t i) const { return items_[i]; }
  std::span<const StoredTransition> items() const { return items_; }

  friend std::size_t relabel_buffer(ReplayBuffer& buffer, const RewardEnsemble& ensemble);

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<StoredTransition> items_;
};

// Linear decay from start to end over decay_steps, then constant.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay_steps = 10'000;

  double at(long step) const;
};

struct LearnerConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  double initial_value = 1000.0;  // optimistic start for every table entry
  EpsilonSchedule epsilon;
  std::size_t replay_capacity = ReplayBuffer::kDefaultCapacity;
  int batch_size = 32;
};

// Tabular Q-learning over the environment's exact cells.
class ValueLearner {
 public:
  ValueLearner(const EnvSpec& spec, double alpha, double gamma, double epsilon = 1.0,
               double initial_value = 0.0);

  const EnvSpec& spec() const { return spec_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double epsilon);

  double value(int cell, int action) const;
  void set_value(int cell, int action, double v);
  std::span<const double> values() const { return table_; }

 private:
  EnvSpec spec_;
  double alpha_;
  double gamma_;
  double epsilon_;
  std::vector<double> table_;  // cell-major, action_count entries per cell
};

// Greedy action of a value row, lowest index on ties.
int greedy_action(std::span<const double> action_values);

int act(const ValueLearner& learner, std::span<const double> observation, RngStream& rng);

// One-step Q backups on batch_size transitions sampled with replacement.
// Returns the mean absolute TD error; throws ContractViolation on an empty
// buffer.
double learn_step(ValueLearner& learner, const ReplayBuffer& buffer, int batch_size,
                  RngStream& rng);

// Rewrites every stored reward with the ensemble-mean prediction. Returns the
// number of transitions rewritten.
std::size_t relabel_buffer(ReplayBuffer& buffer, const RewardEnsemble& ensemble);

// Frozen greedy policy over a copy of the value table.
class GreedyPolicy {
 public:
  explicit GreedyPolicy(const ValueLearner& learner);
  int operator()(std::span<const double> observation) const;

 private:
  EnvSpec spec_;
  std::vector<double> table_;
};

GreedyPolicy policy_snapshot(const ValueLearner& learner);

}  // namespace teachsim
