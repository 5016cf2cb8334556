#include <cmath>

#include <gtest/gtest.h>

#include "teachsim/learner.hpp"

namespace teachsim {
namespace {

Vec cell_obs(int cell) { return {cell / 20.0}; }

StoredTransition stored(int from, int action, int to, double r) {
  return {cell_obs(from), action, cell_obs(to), r};
}

RewardEnsemble make_ensemble(std::uint64_t seed) {
  RngStream init(seed, Stream::kModelInit);
  return RewardEnsemble(3, 1, 3, 16, init);
}

TEST(Epsilon, LinearDecay) {
  const EpsilonSchedule e;
  EXPECT_EQ(e.at(0), 1.0);
  EXPECT_NEAR(e.at(5000), 0.525, 1e-15);
  EXPECT_EQ(e.at(10000), 0.05);
  EXPECT_EQ(e.at(50000), 0.05);
}

TEST(ValueLearner, InitialValueFillsTable) {
  const EnvSpec spec = make_env("gridnav");
  const ValueLearner learner(spec, 0.1, 0.9, 0.0, 7.5);
  EXPECT_EQ(learner.values().size(), static_cast<std::size_t>(cell_count(spec) * spec.action_count));
  for (double v : learner.values()) EXPECT_EQ(v, 7.5);
  EXPECT_THROW(ValueLearner(spec, 0.1, 0.9, 0.0, std::nan("")), ContractViolation);
  EXPECT_THROW(ValueLearner(spec, 1.5, 0.9), ContractViolation);
}

TEST(Act, GreedyArgmax) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.1, 0.99, 0.0);
  learner.set_value(4, 0, 1.0);
  learner.set_value(4, 1, 2.0);
  learner.set_value(4, 2, 0.5);
  RngStream rng(1, Stream::kLearner);
  EXPECT_EQ(act(learner, cell_obs(4), rng), 1);
}

TEST(Act, TieGoesToLowestAction) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.1, 0.99, 0.0);
  learner.set_value(7, 0, 2.0);
  learner.set_value(7, 1, 2.0);
  RngStream rng(1, Stream::kLearner);
  EXPECT_EQ(act(learner, cell_obs(7), rng), 0);
  EXPECT_EQ(greedy_action(std::vector<double>{2.0, 2.0, 0.0}), 0);
}

TEST(Act, FullExplorationIsUniform) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.1, 0.99, 1.0);
  learner.set_value(0, 2, 100.0);
  RngStream rng(2, Stream::kLearner);
  std::vector<int> hits(3, 0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) ++hits[static_cast<std::size_t>(act(learner, cell_obs(0), rng))];
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(kDraws), 1.0 / 3.0, 0.01);
}

TEST(LearnStep, OneStepContraction) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 1.0, 0.0);
  ReplayBuffer buffer;
  buffer.add(stored(5, kRight, 6, 1.0));
  RngStream rng(3, Stream::kLearner);
  EXPECT_EQ(learn_step(learner, buffer, 1, rng), 1.0);
  EXPECT_EQ(learner.value(5, kRight), 1.0);
}

TEST(LearnStep, ZeroRewardsStayZero) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.5, 0.9);
  ReplayBuffer buffer;
  for (int c = 0; c < 20; ++c) buffer.add(stored(c, kRight, c + 1, 0.0));
  RngStream rng(3, Stream::kLearner);
  for (int i = 0; i < 100; ++i) learn_step(learner, buffer, 32, rng);
  for (double v : learner.values()) EXPECT_EQ(v, 0.0);
}

TEST(LearnStep, ThreeCellChainFixedPoint) {
  // Q0 = 1 + 0.9 Q1, Q1 = 2 + 0.9 Q2, Q2 = 0.5 + 0.9 Q2
  // => Q2 = 5, Q1 = 6.5, Q0 = 6.85.
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.2, 0.9);
  ReplayBuffer buffer;
  buffer.add(stored(0, kRight, 1, 1.0));
  buffer.add(stored(1, kRight, 2, 2.0));
  buffer.add(stored(2, kStay, 2, 0.5));
  RngStream rng(4, Stream::kLearner);
  for (int i = 0; i < 3000; ++i) learn_step(learner, buffer, 8, rng);
  EXPECT_NEAR(learner.value(2, kStay), 5.0, 1e-3);
  EXPECT_NEAR(learner.value(1, kRight), 6.5, 1e-3);
  EXPECT_NEAR(learner.value(0, kRight), 6.85, 1e-3);
}

TEST(LearnStep, EmptyBufferThrows) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.1, 0.9);
  ReplayBuffer buffer;
  RngStream rng(4, Stream::kLearner);
  EXPECT_THROW(learn_step(learner, buffer, 4, rng), ContractViolation);
}

TEST(ReplayBuffer, RingOverwritesOldest) {
  ReplayBuffer buffer(3);
  for (int i = 0; i < 5; ++i) buffer.add(stored(i, kStay, i, i));
  ASSERT_EQ(buffer.size(), 3u);
  EXPECT_EQ(buffer[0].labeled_reward, 3.0);
  EXPECT_EQ(buffer[1].labeled_reward, 4.0);
  EXPECT_EQ(buffer[2].labeled_reward, 2.0);
  EXPECT_THROW(ReplayBuffer(0), ContractViolation);
}

TEST(Relabel, EmptyBufferRewritesNothing) {
  ReplayBuffer buffer;
  EXPECT_EQ(relabel_buffer(buffer, make_ensemble(1)), 0u);
}

TEST(Relabel, MatchesFreshPredictionsBitExactly) {
  const RewardEnsemble ensemble = make_ensemble(2);
  ReplayBuffer buffer(500);
  RngStream rng(2, Stream::kLearner);
  for (int i = 0; i < 700; ++i) {
    const int c = rng.uniform_int(21);
    buffer.add(stored(c, rng.uniform_int(3), c, -99.0));
  }
  EXPECT_EQ(relabel_buffer(buffer, ensemble), 500u);
  for (const StoredTransition& t : buffer.items())
    EXPECT_EQ(t.labeled_reward, ensemble.mean_reward(t.state, t.action));
}

TEST(Relabel, Idempotent) {
  const RewardEnsemble ensemble = make_ensemble(3);
  ReplayBuffer buffer;
  for (int c = 0; c < 21; ++c) buffer.add(stored(c, c % 3, c, 0.0));
  relabel_buffer(buffer, ensemble);
  std::vector<double> first;
  for (const auto& t : buffer.items()) first.push_back(t.labeled_reward);
  relabel_buffer(buffer, ensemble);
  for (std::size_t i = 0; i < buffer.size(); ++i) EXPECT_EQ(buffer[i].labeled_reward, first[i]);
}

TEST(Snapshot, ZeroTableTakesActionZero) {
  const EnvSpec spec = make_env("gridnav");
  const GreedyPolicy policy = policy_snapshot(ValueLearner(spec, 0.1, 0.9));
  for (int c = 0; c < cell_count(spec); ++c) EXPECT_EQ(policy(cell_observation(spec, c)), 0);
}

TEST(Snapshot, PrefersRightAndIsFrozen) {
  const EnvSpec spec = make_env("lineworld");
  ValueLearner learner(spec, 0.1, 0.9);
  for (int c = 0; c < 21; ++c) learner.set_value(c, kRight, 1.0);
  const GreedyPolicy policy = policy_snapshot(learner);
  for (int c = 0; c < 21; ++c) learner.set_value(c, kLeft, 5.0);
  for (int c = 0; c < 21; ++c) {
    EXPECT_EQ(policy(cell_obs(c)), kRight);
    EXPECT_EQ(policy(cell_obs(c)), kRight);
  }
}

}  // namespace
}  // namespace teachsim
