#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teachsim/core.hpp"
#include "teachsim/rng.hpp"

namespace teachsim {

enum class EnvKind { kLineWorld, kGridNav };

// Static description of a discrete desk-scale environment. Observations are
// normalized cell coordinates in [0, 1], so obs_dim == g_dim for both
// built-ins and g is the mean of the observation over a segment.
struct EnvSpec {
  std::string name;
  EnvKind kind = EnvKind::kLineWorld;
  int obs_dim = 1;
  int action_count = 3;
  int episode_len = 50;
  int g_dim = 1;
  int segment_length = 10;
  // Cells per axis (LineWorld: N; GridNav: side length).
  int cells_per_axis = 21;
};

// LineWorld actions.
inline constexpr int kLeft = 0;
inline constexpr int kStay = 1;
inline constexpr int kRight = 2;

// GridNav actions.
inline constexpr int kGridStay = 0;
inline constexpr int kGridWest = 1;
inline constexpr int kGridEast = 2;
inline constexpr int kGridSouth = 3;
inline constexpr int kGridNorth = 4;

// "lineworld" or "gridnav". Throws std::invalid_argument for other names or
// when episode_len is not a multiple of segment_length.
EnvSpec make_env(std::string_view name, int segment_length = 10);

struct EnvState {
  Vec observation;
  int step_index = 0;
  bool done = false;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;  // ground truth; evaluation and logging only
};

EnvState env_reset(const EnvSpec& spec, RngStream& rng);
StepResult env_step(const EnvSpec& spec, const EnvState& state, int action, RngStream& rng);

// Ground-truth r(s, a). LineWorld: position/(N-1) of the cell the action
// leads to. GridNav: 1 - manhattan(next cell, goal) / max distance.
double ground_truth_reward(const EnvSpec& spec, std::span<const double> state, int action);
RewardFn ground_truth(const EnvSpec& spec);

// Best achievable episode return from the reset state.
double optimal_return(const EnvSpec& spec);

using Policy = std::function<int(std::span<const double> observation)>;

// Runs n_episodes full episodes and cuts each into episode_len / k segments.
std::vector<Segment> rollout_segments(const EnvSpec& spec, const Policy& policy, RngStream& rng,
                                      int n_episodes);

// Mean normalized coordinates over the segment's states.
Vec map_segment(const EnvSpec& spec, const Segment& segment);

// Tabular view of the discrete state space.
int cell_count(const EnvSpec& spec);
int cell_index(const EnvSpec& spec, std::span<const double> observation);
Vec cell_observation(const EnvSpec& spec, int cell);

}  // namespace teachsim
