#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "teachsim/core.hpp"
#include "teachsim/rng.hpp"

namespace teachsim {

// Reward predictor r_hat(s, a): [obs, one_hot(action)] -> tanh(H) -> tanh(H) -> 1.
//
// All parameters live in one flat vector so optimizers and finite-difference
// checks can treat the network as a point in R^n. Layout:
//   W1 (input x H, column-major), b1 (H), W2 (H x H), b2 (H), w3 (H), b3 (1)
class RewardNet {
 public:
  static constexpr int kDefaultHidden = 32;

  // All parameters zero.
  RewardNet(int obs_dim, int action_count, int hidden = kDefaultHidden);
  // Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static RewardNet random(int obs_dim, int action_count, int hidden, RngStream& rng);

  int obs_dim() const { return obs_dim_; }
  int action_count() const { return action_count_; }
  int input_dim() const { return obs_dim_ + action_count_; }
  int hidden() const { return hidden_; }

  Eigen::Index param_count() const { return params_.size(); }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  // One row per (state, action) input; returns one prediction per row.
  Eigen::VectorXd forward(const Eigen::MatrixXd& inputs) const;

  // Writes [state, one_hot(action)] into `row`.
  void encode(std::span<const double> state, int action, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;

  bool operator==(const RewardNet& other) const;

 private:
  int obs_dim_;
  int action_count_;
  int hidden_;
  Eigen::VectorXd params_;
};

double predict_reward(const RewardNet& net, std::span<const double> state, int action);
// Sum of predict_reward over the steps, in step order.
double predict_segment_return(const RewardNet& net, const Segment& segment);
// Softmax over the two predicted segment returns (unit rationality).
double pref_prob_hat(const RewardNet& net, const Query& query);

inline constexpr double kProbabilityClamp = 1e-7;

// Mean cross-entropy over the batch with probabilities clamped at 1e-7
// before the log. Throws ContractViolation on an empty batch.
double ce_loss(const RewardNet& net, std::span<const PreferenceRecord> batch);

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

// Backpropagation through the two-segment softmax and both MLP passes.
LossGradient ce_loss_gradient(const RewardNet& net, std::span<const PreferenceRecord> batch);
LossGradient ce_loss_gradient(const RewardNet& net,
                              std::span<const PreferenceRecord* const> batch);

struct TrainConfig {
  double learning_rate = 3e-4;
  int batch_size = 32;
  int epochs_per_update = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

void validate(const TrainConfig& config);

class RewardEnsemble {
 public:
  RewardEnsemble(int size, int obs_dim, int action_count, int hidden, RngStream& init_rng);
  explicit RewardEnsemble(std::vector<RewardNet> members);

  std::size_t size() const { return members_.size(); }
  const RewardNet& member(std::size_t i) const { return members_[i].net; }
  RewardNet& member(std::size_t i) { return members_[i].net; }

  // Arithmetic mean of the members' predictions, summed in member order.
  double mean_reward(std::span<const double> state, int action) const;

  friend std::vector<double> train_update(RewardEnsemble& ensemble,
                                          const PreferenceDataset& dataset,
                                          const TrainConfig& config, RngStream& rng);

 private:
  struct Member {
    RewardNet net;
    Eigen::VectorXd adam_m;
    Eigen::VectorXd adam_v;
    long adam_steps = 0;
  };
  std::vector<Member> members_;
};

// Trains every member for epochs_per_update passes over its own shuffle of
// the dataset with Adam. Returns each member's mean loss over its final epoch.
std::vector<double> train_update(RewardEnsemble& ensemble, const PreferenceDataset& dataset,
                                 const TrainConfig& config, RngStream& rng);

// Population standard deviation of pref_prob_hat across members.
double disagreement_score(const RewardEnsemble& ensemble, const Query& query);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  bool passed = false;
};

using GradientFn = std::function<Eigen::VectorXd(const RewardNet&, const PreferenceRecord&)>;

inline constexpr double kFiniteDifferenceStep = 1e-5;

// Compares an analytic gradient of ce_loss on a single record (backprop by
// default) against central differences on `samples` randomly chosen
// parameters. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientCheckResult gradient_check(const RewardNet& net, const PreferenceRecord& record,
                                   double tolerance, RngStream& rng, std::size_t samples = 100,
                                   const GradientFn& analytic = {});

// Text checkpoint: "rewardnet v1 obs_dim=.. action_count=.. hidden=.. member=.."
// followed by one line of comma-separated parameters.
void write_checkpoint(std::ostream& out, const RewardNet& net, int member_index);
std::pair<RewardNet, int> read_checkpoint(std::istream& in);

}  // namespace teachsim
