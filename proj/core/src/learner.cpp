#include "teachsim/learner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace teachsim {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ContractViolation("replay capacity must be positive");
}

void ReplayBuffer::add(StoredTransition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

double EpsilonSchedule::at(long step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(std::max(step, 0L)) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

ValueLearner::ValueLearner(const EnvSpec& spec, double alpha, double gamma, double epsilon,
                           double initial_value)
    : spec_(spec),
      alpha_(alpha),
      gamma_(gamma),
      epsilon_(epsilon),
      table_(static_cast<std::size_t>(cell_count(spec) * spec.action_count), initial_value) {
  if (!std::isfinite(initial_value)) throw ContractViolation("initial value must be finite");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractViolation("alpha must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractViolation("gamma must lie in [0, 1]");
  set_epsilon(epsilon);
}

void ValueLearner::set_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractViolation("epsilon must lie in [0, 1]");
  epsilon_ = epsilon;
}

double ValueLearner::value(int cell, int action) const {
  return table_[static_cast<std::size_t>(cell * spec_.action_count + action)];
}

void ValueLearner::set_value(int cell, int action, double v) {
  if (cell < 0 || cell >= cell_count(spec_) || action < 0 || action >= spec_.action_count) {
    throw ContractViolation("value table index out of range");
  }
  table_[static_cast<std::size_t>(cell * spec_.action_count + action)] = v;
}

int greedy_action(std::span<const double> action_values) {
  return static_cast<int>(std::max_element(action_values.begin(), action_values.end()) -
                          action_values.begin());
}

namespace {

std::span<const double> row_of(std::span<const double> table, const EnvSpec& spec, int cell) {
  return table.subspan(static_cast<std::size_t>(cell * spec.action_count),
                       static_cast<std::size_t>(spec.action_count));
}

}  // namespace

int act(const ValueLearner& learner, std::span<const double> observation, RngStream& rng) {
  const EnvSpec& spec = learner.spec();
  const int cell = cell_index(spec, observation);
  if (rng.uniform() < learner.epsilon()) return rng.uniform_int(spec.action_count);
  return greedy_action(row_of(learner.values(), spec, cell));
}

double learn_step(ValueLearner& learner, const ReplayBuffer& buffer, int batch_size,
                  RngStream& rng) {
  if (buffer.empty()) throw ContractViolation("learn_step on an empty replay buffer");
  if (batch_size <= 0) throw ContractViolation("learn_step batch_size must be positive");
  const EnvSpec& spec = learner.spec();
  double total = 0.0;
  for (int b = 0; b < batch_size; ++b) {
    const StoredTransition& t =
        buffer[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(buffer.size())))];
    const int cell = cell_index(spec, t.state);
    const int next = cell_index(spec, t.next_state);
    const auto next_row = row_of(learner.values(), spec, next);
    const double target =
        t.labeled_reward + learner.gamma() * *std::max_element(next_row.begin(), next_row.end());
    const double current = learner.value(cell, t.action);
    const double td = target - current;
    learner.set_value(cell, t.action, current + learner.alpha() * td);
    total += std::abs(td);
  }
  return total / batch_size;
}

std::size_t relabel_buffer(ReplayBuffer& buffer, const RewardEnsemble& ensemble) {
  // Memoised per (state, action). mean_reward is pure, so each stored value
  // is bit-identical to a fresh call.
  std::map<std::pair<Vec, int>, double> memo;
  for (StoredTransition& t : buffer.items_) {
    auto key = std::make_pair(t.state, t.action);
    auto it = memo.find(key);
    if (it == memo.end()) {
      it = memo.emplace(std::move(key), ensemble.mean_reward(t.state, t.action)).first;
    }
    t.labeled_reward = it->second;
  }
  return buffer.items_.size();
}

GreedyPolicy::GreedyPolicy(const ValueLearner& learner)
    : spec_(learner.spec()), table_(learner.values().begin(), learner.values().end()) {}

int GreedyPolicy::operator()(std::span<const double> observation) const {
  return greedy_action(row_of(table_, spec_, cell_index(spec_, observation)));
}

GreedyPolicy policy_snapshot(const ValueLearner& learner) { return GreedyPolicy(learner); }

}  // namespace teachsim
