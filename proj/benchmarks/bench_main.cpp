#include <benchmark/benchmark.h>

#include "teachsim/experiment.hpp"

namespace teachsim {
namespace {

std::vector<Segment> random_segments(const EnvSpec& spec, int episodes) {
  RngStream roll(1, Stream::kRollout), prng(1, Stream::kLearner);
  const Policy random = [&](std::span<const double>) { return prng.uniform_int(spec.action_count); };
  return rollout_segments(spec, random, roll, episodes);
}

PreferenceDataset random_dataset(const EnvSpec& spec, int n) {
  const auto segs = random_segments(spec, 20);
  RngStream rng(2, Stream::kSampler);
  PreferenceDataset data;
  for (int i = 0; i < n; ++i) {
    const Query q(segs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(segs.size())))],
                  segs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(segs.size())))]);
    data.append({q, LabelDistribution::soft(rng.uniform()), 0, 0});
  }
  return data;
}

void BM_BetaValue(benchmark::State& state) {
  const TeacherSet teachers = make_teacher_grid(4, 2, 4.0, 6.0);
  const Vec g1 = {0.3, 0.4}, g2 = {0.35, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(max_beta(teachers, g1, g2));
}
BENCHMARK(BM_BetaValue);

void BM_CeLossGradient(benchmark::State& state) {
  const EnvSpec spec = make_env("lineworld");
  const PreferenceDataset data = random_dataset(spec, static_cast<int>(state.range(0)));
  RngStream init(3, Stream::kModelInit);
  const RewardNet net = RewardNet::random(spec.obs_dim, spec.action_count, 32, init);
  for (auto _ : state) benchmark::DoNotOptimize(ce_loss_gradient(net, data.records()).loss);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CeLossGradient)->Arg(1)->Arg(32)->Arg(256);

void BM_TrainUpdate(benchmark::State& state) {
  const EnvSpec spec = make_env("lineworld");
  const PreferenceDataset data = random_dataset(spec, static_cast<int>(state.range(0)));
  RngStream init(4, Stream::kModelInit), train(4, Stream::kTraining);
  RewardEnsemble ensemble(3, spec.obs_dim, spec.action_count, 32, init);
  for (auto _ : state) benchmark::DoNotOptimize(train_update(ensemble, data, TrainConfig{}, train));
}
BENCHMARK(BM_TrainUpdate)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_LearnStep(benchmark::State& state) {
  const EnvSpec spec = make_env("gridnav");
  ValueLearner learner(spec, 0.1, 0.99);
  ReplayBuffer buffer;
  for (const Segment& s : random_segments(spec, 100))
    for (const Transition& t : s.steps()) buffer.add({t.state, t.action, t.next_state, 0.5});
  RngStream rng(5, Stream::kLearner);
  for (auto _ : state) benchmark::DoNotOptimize(learn_step(learner, buffer, 32, rng));
}
BENCHMARK(BM_LearnStep);

void BM_RelabelBuffer(benchmark::State& state) {
  const EnvSpec spec = make_env("lineworld");
  ReplayBuffer buffer;
  for (const Segment& s : random_segments(spec, 1000))
    for (const Transition& t : s.steps()) buffer.add({t.state, t.action, t.next_state, 0.0});
  RngStream init(6, Stream::kModelInit);
  const RewardEnsemble ensemble(3, spec.obs_dim, spec.action_count, 32, init);
  for (auto _ : state) benchmark::DoNotOptimize(relabel_buffer(buffer, ensemble));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(buffer.size()));
}
BENCHMARK(BM_RelabelBuffer)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace teachsim

BENCHMARK_MAIN();
