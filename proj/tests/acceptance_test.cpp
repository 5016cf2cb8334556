// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "teachsim/experiment.hpp"

namespace fs = std::filesystem;
using namespace teachsim;

namespace {

// Tolerances and sizes.
constexpr int kDirectionalSeeds = 10;
constexpr double kTeacherSelectionRatio = 1.15;
constexpr double kWelchAlpha = 0.05;
constexpr double kHybridSlack = 0.05;
constexpr int kFidelityPairs = 20;
constexpr int kFidelityDraws = 100'000;
constexpr double kFidelityTolerance = 0.01;
constexpr double kGradientTolerance = 1e-4;
constexpr int kGradientNets = 10;
constexpr int kGradientRecords = 10;
constexpr int kIdentifiabilityLabels = 1000;
constexpr double kIdentifiabilityBeta = 50.0;
constexpr double kSpearmanFloor = 0.9;
constexpr int kGeometryPools = 10;
constexpr int kOracleSeeds = 5;
constexpr long kOracleSteps = 20'000;
constexpr double kOracleFraction = 0.95;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
            << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << x;
  return ss.str();
}

std::vector<double> final_returns(ExperimentConfig config, SamplingStrategy sampling,
                                  TeacherStrategy teacher) {
  config.sampling = sampling;
  config.teacher_selection = teacher;
  std::vector<double> out;
  for (std::uint64_t seed = 0; seed < kDirectionalSeeds; ++seed)
    out.push_back(final_return(run_experiment(config, seed).metrics, config.final_rows));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(x, 3);
  return s;
}

// Segments from episodes whose policy leans right with a per-episode
// probability, so every cell and action shows up across the set.
std::vector<Segment> mixed_segments(const EnvSpec& spec, std::uint64_t seed, int episodes) {
  RngStream roll(seed, Stream::kRollout);
  RngStream choose(seed, Stream::kLearner);
  std::vector<Segment> out;
  for (int e = 0; e < episodes; ++e) {
    const double lean = choose.uniform();
    const Policy policy = [&](std::span<const double>) {
      const double u = choose.uniform();
      if (u < lean) return kRight;
      return u < lean + (1.0 - lean) / 2.0 ? kStay : kLeft;
    };
    auto segs = rollout_segments(spec, policy, roll, 1);
    out.insert(out.end(), segs.begin(), segs.end());
  }
  return out;
}

struct Directional {
  std::vector<double> uniform_dis, max_beta_dis, max_beta_hybrid;
};

Directional run_directional() {
  const ExperimentConfig config;
  return {final_returns(config, SamplingStrategy::kDisagreement, TeacherStrategy::kUniform),
          final_returns(config, SamplingStrategy::kDisagreement, TeacherStrategy::kMaxBeta),
          final_returns(config, SamplingStrategy::kHybrid, TeacherStrategy::kMaxBeta)};
}

Outcome teacher_selection(const Directional& d) {
  const double u = mean(d.uniform_dis), m = mean(d.max_beta_dis);
  const WelchResult w = welch_one_sided(d.max_beta_dis, d.uniform_dis);
  return {m >= kTeacherSelectionRatio * u && w.p_value < kWelchAlpha,
          "max_beta " + fmt(m) + " +/- " + fmt(population_stddev(d.max_beta_dis)) + " [" + join(d.max_beta_dis) +
              "] vs uniform " + fmt(u) + " +/- " + fmt(population_stddev(d.uniform_dis)) + " [" +
              join(d.uniform_dis) + "], ratio " + fmt(u > 0 ? m / u : INFINITY) + " (need >= 1.15), Welch p " +
              fmt(w.p_value) + " (need < 0.05)"};
}

Outcome hybrid_sampling(const Directional& d) {
  const double h = mean(d.max_beta_hybrid), m = mean(d.max_beta_dis);
  return {h >= (1.0 - kHybridSlack) * m, "hybrid " + fmt(h) + " +/- " + fmt(population_stddev(d.max_beta_hybrid)) +
                                             " [" + join(d.max_beta_hybrid) + "] vs disagreement " + fmt(m) +
                                             " (need >= " + fmt((1.0 - kHybridSlack) * m) + ")"};
}

Outcome label_fidelity() {
  const EnvSpec spec = make_env("lineworld");
  const RewardFn truth = ground_truth(spec);
  const auto segs = mixed_segments(spec, 31, 20);
  RngStream rng(31, Stream::kSampler);
  RngStream labels(31, Stream::kTeachers);
  double worst = 0.0;
  double beta_lo = INFINITY, beta_hi = 0.0;
  for (int j = 0; j < kFidelityPairs; ++j) {
    // Target beta log-spaced over [0.01, 50]; the scale is solved so the
    // random kernel hits it at the random query.
    const double target = 0.01 * std::pow(5000.0, j / static_cast<double>(kFidelityPairs - 1));
    const Query q(segs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(segs.size())))],
                  segs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(segs.size())))]);
    const Vec c = {rng.uniform(), rng.uniform()};
    const Vec b = {3.0 * rng.uniform(), 3.0 * rng.uniform()};
    const Vec g1 = map_segment(spec, q.first), g2 = map_segment(spec, q.second);
    const double unit = BetaKernel(c, b, 1.0)(g1, g2);
    const Teacher teacher{j, BetaKernel(c, b, target / unit)};
    const double beta = beta_value(teacher, g1, g2);
    beta_lo = std::min(beta_lo, beta);
    beta_hi = std::max(beta_hi, beta);
    const double p = query_pref_prob(teacher, q, truth, spec);
    int first = 0;
    for (int i = 0; i < kFidelityDraws; ++i) first += sample_label(teacher, q, truth, spec, labels).mu1 == 1.0;
    worst = std::max(worst, std::abs(first / static_cast<double>(kFidelityDraws) - p));
  }
  return {worst <= kFidelityTolerance, "beta range [" + fmt(beta_lo) + ", " + fmt(beta_hi) + "], max |freq - p| " +
                                           fmt(worst) + " (need <= 0.01)"};
}

Outcome gradient_correctness() {
  const EnvSpec spec = make_env("lineworld");
  const auto segs = mixed_segments(spec, 41, 10);
  RngStream rng(41, Stream::kModelInit);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int n = 0; n < kGradientNets; ++n) {
    const RewardNet net = RewardNet::random(spec.obs_dim, spec.action_count, RewardNet::kDefaultHidden, rng);
    for (int r = 0; r < kGradientRecords; ++r) {
      const Query q(segs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(segs.size())))],
                    segs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(segs.size())))]);
      const PreferenceRecord rec{q, LabelDistribution::soft(rng.uniform()), 0, 0};
      const GradientCheckResult res =
          gradient_check(net, rec, kGradientTolerance, rng, static_cast<std::size_t>(net.param_count()));
      worst = std::max(worst, res.max_relative_error);
      checked += res.parameters_checked;
    }
  }
  return {worst <= kGradientTolerance,
          "max relative error " + fmt(worst) + " over " + std::to_string(checked) + " parameters (need <= 1e-4)"};
}

Outcome reward_identifiability() {
  const EnvSpec spec = make_env("lineworld");
  const RewardFn truth = ground_truth(spec);
  const TeacherSet teacher = make_constant_teachers(1, spec.g_dim, kIdentifiabilityBeta);
  const auto segs = mixed_segments(spec, 51, 200);
  RngStream pick(51, Stream::kSampler), labels(51, Stream::kTeachers);
  PreferenceDataset data;
  for (int i = 0; i < kIdentifiabilityLabels; ++i) {
    const int n = static_cast<int>(segs.size());
    const auto a = static_cast<std::size_t>(pick.uniform_int(n));
    auto b = static_cast<std::size_t>(pick.uniform_int(n - 1));
    if (b >= a) ++b;
    const Query q(segs[a], segs[b]);
    data.append({q, sample_label(teacher[0], q, truth, spec, labels), 0, 0});
  }
  RngStream init(51, Stream::kModelInit), train(51, Stream::kTraining);
  RewardEnsemble ensemble(3, spec.obs_dim, spec.action_count, RewardNet::kDefaultHidden, init);
  for (int update = 0; update < 20; ++update) train_update(ensemble, data, TrainConfig{}, train);
  std::vector<double> predicted, actual;
  for (int c = 0; c < cell_count(spec); ++c) {
    const Vec obs = cell_observation(spec, c);
    for (int a = 0; a < spec.action_count; ++a) {
      predicted.push_back(ensemble.mean_reward(obs, a));
      actual.push_back(ground_truth_reward(spec, obs, a));
    }
  }
  const double rho = spearman(predicted, actual);
  return {rho >= kSpearmanFloor, "Spearman " + fmt(rho) + " over " + std::to_string(predicted.size()) +
                                     " (state, action) pairs (need >= 0.9)"};
}

Outcome similarity_geometry() {
  const ExperimentConfig config;
  const EnvSpec spec = make_env(config.env, config.segment_length);
  const TeacherSet teachers = build_teachers(config, spec);
  double sim_inter = 0.0, uni_inter = 0.0, sim_dist = 0.0, uni_dist = 0.0;
  int pools_with_lower_distance = 0;
  for (int p = 0; p < kGeometryPools; ++p) {
    const auto seed = static_cast<std::uint64_t>(100 + p);
    const auto segs = mixed_segments(spec, seed, config.candidate_episodes);
    RngStream rng(seed, Stream::kSampler);
    RngStream init(seed, Stream::kModelInit);
    const RewardEnsemble ensemble(config.ensemble_size, spec.obs_dim, spec.action_count, config.hidden, init);
    const QueryPool pool = build_pool(spec, segs, config.pool_size, rng);
    const auto n = static_cast<std::size_t>(config.queries_per_session);
    auto stats = [&](const std::vector<std::size_t>& idx) {
      double inter = 0.0, dist = 0.0;
      for (std::size_t i : idx) {
        inter += is_inter_domain(teachers, pool[i].g1, pool[i].g2, config.beta_floor);
        dist += similarity_distance(pool[i]);
      }
      return std::make_pair(inter / static_cast<double>(idx.size()), dist / static_cast<double>(idx.size()));
    };
    const auto s = stats(select_queries(pool, SamplingStrategy::kSimilarity, n, ensemble, rng));
    const auto u = stats(select_queries(pool, SamplingStrategy::kUniform, n, ensemble, rng));
    sim_inter += s.first / kGeometryPools;
    uni_inter += u.first / kGeometryPools;
    sim_dist += s.second / kGeometryPools;
    uni_dist += u.second / kGeometryPools;
    pools_with_lower_distance += s.second < u.second;
  }
  return {sim_inter < uni_inter && sim_dist < uni_dist,
          "inter-domain fraction similarity " + fmt(sim_inter) + " vs uniform " + fmt(uni_inter) +
              ", g-distance " + fmt(sim_dist) + " vs " + fmt(uni_dist) + ", lower distance in " +
              std::to_string(pools_with_lower_distance) + "/" + std::to_string(kGeometryPools) + " pools"};
}

Outcome relabel_contract() {
  const EnvSpec spec = make_env("lineworld");
  const RewardFn truth = ground_truth(spec);
  const TeacherSet teacher = make_constant_teachers(1, spec.g_dim, 5.0);
  RngStream init(61, Stream::kModelInit), train(61, Stream::kTraining), labels(61, Stream::kTeachers);
  RngStream pick(61, Stream::kSampler);
  RewardEnsemble ensemble(3, spec.obs_dim, spec.action_count, RewardNet::kDefaultHidden, init);
  ReplayBuffer buffer(5000);
  PreferenceDataset data;
  std::size_t compared = 0, mismatched = 0;
  for (int round = 0; round < 5; ++round) {
    const auto segs = mixed_segments(spec, static_cast<std::uint64_t>(61 + round), 30);
    for (const Segment& s : segs)
      for (const Transition& t : s.steps())
        buffer.add({t.state, t.action, t.next_state, ensemble.mean_reward(t.state, t.action)});
    for (int i = 0; i < 20; ++i) {
      const Query q(segs[static_cast<std::size_t>(pick.uniform_int(static_cast<int>(segs.size())))],
                    segs[static_cast<std::size_t>(pick.uniform_int(static_cast<int>(segs.size())))]);
      data.append({q, sample_label(teacher[0], q, truth, spec, labels), 0, round});
    }
    train_update(ensemble, data, TrainConfig{}, train);
    relabel_buffer(buffer, ensemble);
    for (const StoredTransition& t : buffer.items()) {
      ++compared;
      mismatched += t.labeled_reward != ensemble.mean_reward(t.state, t.action);
    }
  }
  return {mismatched == 0, std::to_string(compared - mismatched) + "/" + std::to_string(compared) +
                               " stored rewards bit-identical to fresh predictions"};
}

Outcome oracle_learner() {
  const ExperimentConfig config;
  const EnvSpec spec = make_env("lineworld");
  double hand = 0.0;
  for (int t = 1; t <= spec.episode_len; ++t) hand += std::min(t, spec.cells_per_axis - 1) / static_cast<double>(spec.cells_per_axis - 1);
  const double target = kOracleFraction * hand;
  std::vector<double> returns;
  bool all = true;
  for (std::uint64_t seed = 0; seed < kOracleSeeds; ++seed) {
    RngStream env_rng(seed, Stream::kEnv), learner_rng(seed, Stream::kLearner), eval_rng(seed, Stream::kEvaluation);
    ValueLearner learner(spec, config.learner.alpha, config.learner.gamma, 1.0, config.learner.initial_value);
    ReplayBuffer buffer(config.learner.replay_capacity);
    EnvState state = env_reset(spec, env_rng);
    for (long step = 0; step < kOracleSteps; ++step) {
      learner.set_epsilon(config.learner.epsilon.at(step));
      const int action = act(learner, state.observation, learner_rng);
      StepResult result = env_step(spec, state, action, env_rng);
      buffer.add({state.observation, action, result.state.observation, result.reward});
      learn_step(learner, buffer, config.learner.batch_size, learner_rng);
      state = result.state.done ? env_reset(spec, env_rng) : std::move(result.state);
    }
    returns.push_back(evaluate_policy(policy_snapshot(learner), spec, config.eval_episodes, eval_rng));
    all = all && returns.back() >= target;
  }
  return {all, "returns [" + join(returns) + "] vs target " + fmt(target) + " (0.95 x optimum " + fmt(hand) +
                   ", library optimum " + fmt(optimal_return(spec)) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "no CLI binary given (--cli)"};
  fs::create_directories(work);
  const fs::path config = work / "determinism.ini";
  {
    std::ofstream out(config);
    write_config(out, ExperimentConfig{});
  }
  std::vector<std::string> outputs;
  for (const char* name : {"first", "second"}) {
    const fs::path dir = work / name;
    fs::remove_all(dir);
    const std::string cmd = "\"" + cli + "\" run --config \"" + config.string() + "\" --seed 3 --out \"" +
                            dir.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
    outputs.push_back(slurp(dir / "metrics.csv"));
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, same ? "metrics.csv byte-identical (" + std::to_string(outputs[0].size()) + " bytes)"
                     : "metrics.csv differs between runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"teachsim acceptance suite"};
  std::string cli;
  std::string work = "acceptance_work";
  app.add_option("--cli", cli, "path to the teachsim executable");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  report(3, "label-model fidelity", label_fidelity());
  report(4, "gradient correctness", gradient_correctness());
  report(5, "reward identifiability", reward_identifiability());
  report(6, "similarity geometry", similarity_geometry());
  report(7, "relabeling contract", relabel_contract());
  report(8, "oracle learner", oracle_learner());
  report(9, "determinism", cli_determinism(cli, work));
  const Directional d = run_directional();
  report(1, "teacher selection", teacher_selection(d));
  report(2, "hybrid sampling", hybrid_sampling(d));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
