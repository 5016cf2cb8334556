#include "teachsim/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "teachsim/dataset_io.hpp"
#include "teachsim/learner.hpp"
#include "teachsim/reward_model.hpp"
#include "teachsim/selection.hpp"

#ifndef TEACHSIM_VERSION
#define TEACHSIM_VERSION "dev"
#endif

namespace teachsim {

std::string version_string() { return std::string("teachsim ") + TEACHSIM_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_vec(std::ostream& out, const Vec& v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
}

struct SessionStats {
  double loss = kNaN;
  double mean_beta = kNaN;
  double inter_domain = kNaN;
  double disagreement = kNaN;
};

}  // namespace

void write_manifest(std::ostream& out, const RunManifest& m) {
  out << "# teachsim run manifest\n";
  out << "version = " << m.version << '\n';
  out << "seed = " << m.seed << "\n\n";
  write_config(out, m.config);
  out << "\n[calibration]\n";
  if (m.calibration) {
    out << "beta_floor = " << format_double(m.calibration->beta_floor) << '\n';
    out << "width = " << format_double(m.calibration->width) << '\n';
    out << "min_coverage_beta = " << format_double(m.calibration->min_coverage) << '\n';
  } else {
    out << "width = explicit\n";
  }
  out << "\n[teacher_kernels]\n";
  for (const Teacher& t : m.teachers) {
    out << "teacher." << t.id << ".center = ";
    write_vec(out, t.kernel.center());
    out << "\nteacher." << t.id << ".width = ";
    write_vec(out, t.kernel.width());
    out << "\nteacher." << t.id << ".scale = " << format_double(t.kernel.scale()) << '\n';
  }
}

TeacherSet build_teachers(const ExperimentConfig& config, const EnvSpec& spec,
                          std::optional<Calibration>* calibration) {
  if (config.width) {
    if (calibration) calibration->reset();
    return make_teacher_grid(config.teacher_count, spec.g_dim, config.teacher_scale, *config.width);
  }
  const TeacherSet shape = make_teacher_grid(config.teacher_count, spec.g_dim, config.teacher_scale, 0.0);
  const Calibration cal = calibrate_widths(shape, spec, config.beta_floor);
  if (calibration) *calibration = cal;
  return make_teacher_grid(config.teacher_count, spec.g_dim, config.teacher_scale, cal.widths);
}

double evaluate_policy(const Policy& policy, const EnvSpec& spec, int episodes, RngStream& rng) {
  if (episodes < 1) throw ContractViolation("evaluate_policy needs at least one episode");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    EnvState state = env_reset(spec, rng);
    while (!state.done) {
      StepResult next = env_step(spec, state, policy(state.observation), rng);
      total += next.reward;
      state = std::move(next.state);
    }
  }
  return total / episodes;
}

RunOutput run_experiment(const ExperimentConfig& config, std::uint64_t seed, const RunHooks& hooks) {
  validate(config);
  const EnvSpec spec = make_env(config.env, config.segment_length);
  const RewardFn truth = ground_truth(spec);

  RunOutput out;
  std::optional<Calibration> calibration;
  const TeacherSet teachers = build_teachers(config, spec, &calibration);
  out.manifest = {config, seed, calibration, {teachers.begin(), teachers.end()}, version_string()};

  RngStream env_rng(seed, Stream::kEnv);
  RngStream teacher_rng(seed, Stream::kTeachers);
  RngStream sampler_rng(seed, Stream::kSampler);
  RngStream learner_rng(seed, Stream::kLearner);
  RngStream init_rng(seed, Stream::kModelInit);
  RngStream eval_rng(seed, Stream::kEvaluation);
  RngStream rollout_rng(seed, Stream::kRollout);
  RngStream train_rng(seed, Stream::kTraining);

  RewardEnsemble ensemble(config.ensemble_size, spec.obs_dim, spec.action_count, config.hidden, init_rng);
  ValueLearner learner(spec, config.learner.alpha, config.learner.gamma, config.learner.epsilon.at(0),
                       config.learner.initial_value);
  ReplayBuffer buffer(config.learner.replay_capacity);
  SessionStats stats;

  auto record_row = [&](long step) {
    const double ret = evaluate_policy(policy_snapshot(learner), spec, config.eval_episodes, eval_rng);
    out.metrics.rows.push_back(
        {seed, step, ret, stats.loss, stats.mean_beta, stats.inter_domain, stats.disagreement});
  };

  auto feedback_session = [&](long step) {
    const Policy behaviour = [&](std::span<const double> obs) { return act(learner, obs, rollout_rng); };
    const auto segments = rollout_segments(spec, behaviour, rollout_rng, config.candidate_episodes);
    const QueryPool pool = build_pool(spec, segments, config.pool_size, sampler_rng);
    const auto chosen = select_queries(pool, config.sampling,
                                       static_cast<std::size_t>(config.queries_per_session), ensemble,
                                       sampler_rng);
    double beta_sum = 0.0;
    double disagreement_sum = 0.0;
    int inter_domain = 0;
    for (const std::size_t idx : chosen) {
      const PoolEntry& entry = pool[idx];
      const int id = select_teacher(teachers, entry.g1, entry.g2, config.teacher_selection, sampler_rng);
      const Teacher& teacher = teachers[static_cast<std::size_t>(id)];
      const double beta = beta_value(teacher, entry.g1, entry.g2);
      const double p = pref_prob(beta, segment_return(entry.query.first, truth),
                                 segment_return(entry.query.second, truth));
      beta_sum += beta;
      disagreement_sum += disagreement_score(ensemble, entry.query);
      if (is_inter_domain(teachers, entry.g1, entry.g2, config.beta_floor)) ++inter_domain;
      out.dataset.append({entry.query, sample_label(p, teacher_rng), id, step});
    }
    const auto n = static_cast<double>(chosen.size());
    const auto losses = train_update(ensemble, out.dataset, config.train, train_rng);
    relabel_buffer(buffer, ensemble);
    stats.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
    stats.mean_beta = beta_sum / n;
    stats.inter_domain = inter_domain / n;
    stats.disagreement = disagreement_sum / n;
  };

  record_row(0);
  EnvState state = env_reset(spec, env_rng);
  for (long step = 0; step < config.total_steps; ++step) {
    if (step % config.session_interval == 0) feedback_session(step);

    learner.set_epsilon(config.learner.epsilon.at(step));
    const int action = act(learner, state.observation, learner_rng);
    StepResult result = env_step(spec, state, action, env_rng);
    if (hooks.poison_step_reward) result.reward = *hooks.poison_step_reward;
    buffer.add({state.observation, action, result.state.observation,
                ensemble.mean_reward(state.observation, action)});
    learn_step(learner, buffer, config.learner.batch_size, learner_rng);

    state = result.state.done ? env_reset(spec, env_rng) : std::move(result.state);
    if ((step + 1) % config.eval_interval == 0) record_row(step + 1);
  }
  return out;
}

void write_run(const RunOutput& run, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  emit_csv(run.metrics, out_dir + "/metrics.csv");
  std::ofstream manifest(out_dir + "/manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write " + out_dir + "/manifest.txt");
  write_manifest(manifest, run.manifest);
  save_dataset(out_dir + "/dataset.txt", run.dataset);
}

}  // namespace teachsim
