#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "teachsim/config.hpp"
#include "teachsim/core.hpp"
#include "teachsim/envs.hpp"
#include "teachsim/metrics.hpp"
#include "teachsim/teachers.hpp"

namespace teachsim {

std::string version_string();

struct RunManifest {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::optional<Calibration> calibration;  // absent when the width was given
  std::vector<Teacher> teachers;
  std::string version;
};

void write_manifest(std::ostream& out, const RunManifest& manifest);

struct RunOutput {
  RunMetrics metrics;
  RunManifest manifest;
  PreferenceDataset dataset;
};

// Test seams. A hook that replaces the reward env_step hands to the acting
// loop lets tests prove the learner never consumes ground truth.
struct RunHooks {
  std::optional<double> poison_step_reward;
};

// Builds the teacher set a config describes, calibrating the width against
// beta_floor unless an explicit width is configured.
TeacherSet build_teachers(const ExperimentConfig& config, const EnvSpec& spec,
                          std::optional<Calibration>* calibration = nullptr);

// The interleaved act / learn / query / label loop for one seed.
RunOutput run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const RunHooks& hooks = {});

// Mean ground-truth episode return of `policy`.
double evaluate_policy(const Policy& policy, const EnvSpec& spec, int episodes, RngStream& rng);

// Writes metrics.csv, manifest.txt and dataset.txt under out_dir.
void write_run(const RunOutput& run, const std::string& out_dir);

}  // namespace teachsim
