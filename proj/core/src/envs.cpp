#include "teachsim/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace teachsim {
namespace {

// Integer coordinates of an observation, validated against the grid.
std::vector<int> coords_of(const EnvSpec& spec, std::span<const double> observation) {
  if (static_cast<int>(observation.size()) != spec.obs_dim) {
    throw ContractViolation("observation dimension " + std::to_string(observation.size()) +
                            " does not match " + spec.name + " obs_dim " +
                            std::to_string(spec.obs_dim));
  }
  const int top = spec.cells_per_axis - 1;
  std::vector<int> coords(observation.size());
  for (std::size_t i = 0; i < observation.size(); ++i) {
    const double scaled = observation[i] * top;
    const long c = std::lround(scaled);
    if (c < 0 || c > top || std::abs(scaled - static_cast<double>(c)) > 1e-9) {
      throw ContractViolation("observation is not a cell of " + spec.name);
    }
    coords[i] = static_cast<int>(c);
  }
  return coords;
}

Vec observation_of(const EnvSpec& spec, const std::vector<int>& coords) {
  const double top = spec.cells_per_axis - 1;
  Vec obs(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) obs[i] = coords[i] / top;
  return obs;
}

std::vector<int> apply_action(const EnvSpec& spec, std::vector<int> coords, int action) {
  if (action < 0 || action >= spec.action_count) {
    throw ContractViolation("action " + std::to_string(action) + " outside " + spec.name +
                            " action set");
  }
  const int top = spec.cells_per_axis - 1;
  switch (spec.kind) {
    case EnvKind::kLineWorld:
      coords[0] += action - 1;
      break;
    case EnvKind::kGridNav:
      if (action == kGridWest) coords[0] -= 1;
      if (action == kGridEast) coords[0] += 1;
      if (action == kGridSouth) coords[1] -= 1;
      if (action == kGridNorth) coords[1] += 1;
      break;
  }
  for (int& c : coords) c = std::clamp(c, 0, top);
  return coords;
}

double reward_at(const EnvSpec& spec, const std::vector<int>& coords) {
  const int top = spec.cells_per_axis - 1;
  switch (spec.kind) {
    case EnvKind::kLineWorld:
      return static_cast<double>(coords[0]) / top;
    case EnvKind::kGridNav: {
      // Goal is the far corner (top, top).
      const int distance = (top - coords[0]) + (top - coords[1]);
      return 1.0 - static_cast<double>(distance) / (2 * top);
    }
  }
  return 0.0;
}

}  // namespace

EnvSpec make_env(std::string_view name, int segment_length) {
  EnvSpec spec;
  if (name == "lineworld") {
    spec = {"lineworld", EnvKind::kLineWorld, 1, 3, 50, 1, segment_length, 21};
  } else if (name == "gridnav") {
    spec = {"gridnav", EnvKind::kGridNav, 2, 5, 50, 2, segment_length, 11};
  } else {
    throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
  }
  if (segment_length <= 0 || spec.episode_len % segment_length != 0) {
    throw std::invalid_argument("episode length " + std::to_string(spec.episode_len) +
                                " is not a multiple of segment length " +
                                std::to_string(segment_length));
  }
  return spec;
}

EnvState env_reset(const EnvSpec& spec, RngStream& /*rng*/) {
  return {Vec(static_cast<std::size_t>(spec.obs_dim), 0.0), 0, false};
}

StepResult env_step(const EnvSpec& spec, const EnvState& state, int action, RngStream& /*rng*/) {
  if (state.done) throw ContractViolation("env_step on a finished episode");
  const auto next = apply_action(spec, coords_of(spec, state.observation), action);
  StepResult result;
  result.state.observation = observation_of(spec, next);
  result.state.step_index = state.step_index + 1;
  result.state.done = result.state.step_index >= spec.episode_len;
  result.reward = reward_at(spec, next);
  return result;
}

double ground_truth_reward(const EnvSpec& spec, std::span<const double> state, int action) {
  return reward_at(spec, apply_action(spec, coords_of(spec, state), action));
}

RewardFn ground_truth(const EnvSpec& spec) {
  return [spec](std::span<const double> state, int action) {
    return ground_truth_reward(spec, state, action);
  };
}

double optimal_return(const EnvSpec& spec) {
  // Both built-ins start at the origin and gain 1/(distance to goal) per
  // step of progress; the best policy walks straight to the goal and stays.
  const int distance = spec.kind == EnvKind::kLineWorld ? spec.cells_per_axis - 1
                                                       : 2 * (spec.cells_per_axis - 1);
  double total = 0.0;
  for (int t = 1; t <= spec.episode_len; ++t) {
    total += static_cast<double>(std::min(t, distance)) / distance;
  }
  return total;
}

std::vector<Segment> rollout_segments(const EnvSpec& spec, const Policy& policy, RngStream& rng,
                                      int n_episodes) {
  std::vector<Segment> segments;
  const int k = spec.segment_length;
  segments.reserve(static_cast<std::size_t>(std::max(n_episodes, 0)) * spec.episode_len / k);
  for (int episode = 0; episode < n_episodes; ++episode) {
    EnvState state = env_reset(spec, rng);
    std::vector<Transition> steps;
    steps.reserve(static_cast<std::size_t>(k));
    while (!state.done) {
      const int action = policy(state.observation);
      StepResult next = env_step(spec, state, action, rng);
      steps.push_back({state.observation, action, next.state.observation});
      state = std::move(next.state);
      if (static_cast<int>(steps.size()) == k) {
        segments.emplace_back(std::move(steps));
        steps.clear();
        steps.reserve(static_cast<std::size_t>(k));
      }
    }
  }
  return segments;
}

Vec map_segment(const EnvSpec& spec, const Segment& segment) {
  Vec g(static_cast<std::size_t>(spec.g_dim), 0.0);
  for (const Transition& t : segment.steps()) {
    if (static_cast<int>(t.state.size()) != spec.obs_dim) {
      throw ContractViolation("segment state dimension does not match " + spec.name);
    }
    for (int i = 0; i < spec.g_dim; ++i) g[i] += t.state[i];
  }
  for (double& x : g) x /= static_cast<double>(segment.length());
  return g;
}

int cell_count(const EnvSpec& spec) {
  int n = 1;
  for (int i = 0; i < spec.obs_dim; ++i) n *= spec.cells_per_axis;
  return n;
}

int cell_index(const EnvSpec& spec, std::span<const double> observation) {
  const auto coords = coords_of(spec, observation);
  int index = 0;
  for (auto it = coords.rbegin(); it != coords.rend(); ++it) index = index * spec.cells_per_axis + *it;
  return index;
}

Vec cell_observation(const EnvSpec& spec, int cell) {
  if (cell < 0 || cell >= cell_count(spec)) throw ContractViolation("cell index out of range");
  std::vector<int> coords(static_cast<std::size_t>(spec.obs_dim));
  for (int& c : coords) {
    c = cell % spec.cells_per_axis;
    cell /= spec.cells_per_axis;
  }
  return observation_of(spec, coords);
}

}  // namespace teachsim
