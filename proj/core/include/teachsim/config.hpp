#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teachsim/learner.hpp"
#include "teachsim/reward_model.hpp"
#include "teachsim/selection.hpp"

namespace teachsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // [env]
  std::string env = "lineworld";
  int segment_length = 10;

  // [teachers]
  int teacher_count = 4;
  double teacher_scale = 4.0;
  double beta_floor = 1.0;
  std::optional<double> width;  // explicit width skips calibration

  // [selection]
  SamplingStrategy sampling = SamplingStrategy::kDisagreement;
  TeacherStrategy teacher_selection = TeacherStrategy::kUniform;
  int queries_per_session = 10;
  int pool_size = 100;
  int candidate_episodes = 10;

  // [reward_model]
  int ensemble_size = 3;
  int hidden = RewardNet::kDefaultHidden;
  TrainConfig train;

  // [learner]
  LearnerConfig learner;

  // [experiment]
  long total_steps = 100'000;
  long session_interval = 2'000;
  long eval_interval = 1'000;
  int eval_episodes = 10;
  int final_rows = 3;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
};

// Flat INI text:
//
//   [teachers]
//   count = 4
//   beta_floor = 0.5
//
// Every key is addressed as "section.key". Unknown sections or keys, bad
// values and failed validation raise ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

// Applies one "section.key" = value assignment (used for CLI overrides).
void set_config_value(ExperimentConfig& config, const std::string& dotted_key,
                      const std::string& value);

void validate(const ExperimentConfig& config);

// Fully resolved config in the same INI format; parse_config(write) is the
// identity.
void write_config(std::ostream& out, const ExperimentConfig& config);

// "0..9" (inclusive range) or "0,3,7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace teachsim
