#include "teachsim/reward_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "teachsim/teachers.hpp"

namespace teachsim {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
  Index in, hidden;
  Index w1() const { return 0; }
  Index b1() const { return in * hidden; }
  Index w2() const { return b1() + hidden; }
  Index b2() const { return w2() + hidden * hidden; }
  Index w3() const { return b2() + hidden; }
  Index b3() const { return w3() + hidden; }
  Index total() const { return b3() + 1; }
};

Layout layout_of(const RewardNet& net) { return {net.input_dim(), net.hidden()}; }

template <typename Vector>
auto matrix_view(Vector& params, Index offset, Index rows, Index cols) {
  using Scalar = std::remove_reference_t<decltype(params[0])>;
  using Mat = std::conditional_t<std::is_const_v<Scalar>, const MatrixXd, MatrixXd>;
  return Eigen::Map<Mat>(params.data() + offset, rows, cols);
}

template <typename Vector>
auto vector_view(Vector& params, Index offset, Index size) {
  using Scalar = std::remove_reference_t<decltype(params[0])>;
  using V = std::conditional_t<std::is_const_v<Scalar>, const VectorXd, VectorXd>;
  return Eigen::Map<V>(params.data() + offset, size);
}

}  // namespace

RewardNet::RewardNet(int obs_dim, int action_count, int hidden)
    : obs_dim_(obs_dim), action_count_(action_count), hidden_(hidden) {
  if (obs_dim <= 0 || action_count <= 0 || hidden <= 0) {
    throw ContractViolation("reward net dimensions must be positive");
  }
  params_ = VectorXd::Zero(layout_of(*this).total());
}

RewardNet RewardNet::random(int obs_dim, int action_count, int hidden, RngStream& rng) {
  RewardNet net(obs_dim, action_count, hidden);
  const Layout l = layout_of(net);
  auto fill = [&](Index begin, Index end, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = begin; i < end; ++i) net.params_[i] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  fill(l.w1(), l.w2(), l.in);
  fill(l.w2(), l.w3(), l.hidden);
  fill(l.w3(), l.total(), l.hidden);
  return net;
}

void RewardNet::encode(std::span<const double> state, int action,
                       Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
  if (static_cast<int>(state.size()) != obs_dim_) {
    throw ContractViolation("reward net expects obs_dim " + std::to_string(obs_dim_) + ", got " +
                            std::to_string(state.size()));
  }
  if (action < 0 || action >= action_count_) {
    throw ContractViolation("reward net action " + std::to_string(action) + " out of range");
  }
  row.setZero();
  for (int i = 0; i < obs_dim_; ++i) row[i] = state[i];
  row[obs_dim_ + action] = 1.0;
}

VectorXd RewardNet::forward(const MatrixXd& inputs) const {
  const Layout l = layout_of(*this);
  const auto w1 = matrix_view(params_, l.w1(), l.in, l.hidden);
  const auto b1 = vector_view(params_, l.b1(), l.hidden);
  const auto w2 = matrix_view(params_, l.w2(), l.hidden, l.hidden);
  const auto b2 = vector_view(params_, l.b2(), l.hidden);
  const auto w3 = vector_view(params_, l.w3(), l.hidden);
  MatrixXd a1 = ((inputs * w1).rowwise() + b1.transpose()).array().tanh();
  MatrixXd a2 = ((a1 * w2).rowwise() + b2.transpose()).array().tanh();
  return (a2 * w3).array() + params_[l.b3()];
}

bool RewardNet::operator==(const RewardNet& other) const {
  return obs_dim_ == other.obs_dim_ && action_count_ == other.action_count_ &&
         hidden_ == other.hidden_ && params_ == other.params_;
}

double predict_reward(const RewardNet& net, std::span<const double> state, int action) {
  if (static_cast<int>(state.size()) != net.obs_dim()) {
    throw ContractViolation("reward net expects obs_dim " + std::to_string(net.obs_dim()) +
                            ", got " + std::to_string(state.size()));
  }
  if (action < 0 || action >= net.action_count()) {
    throw ContractViolation("reward net action " + std::to_string(action) + " out of range");
  }
  const Layout l = layout_of(net);
  const VectorXd& p = net.params();
  const Index h = l.hidden;
  // The one-hot half of the input selects a single row of W1.
  VectorXd a1(h);
  for (Index j = 0; j < h; ++j) {
    const double* col = p.data() + l.w1() + j * l.in;
    double z = p[l.b1() + j] + col[net.obs_dim() + action];
    for (int i = 0; i < net.obs_dim(); ++i) z += col[i] * state[i];
    a1[j] = std::tanh(z);
  }
  double out = p[l.b3()];
  for (Index j = 0; j < h; ++j) {
    const double* col = p.data() + l.w2() + j * h;
    double z = p[l.b2() + j];
    for (Index i = 0; i < h; ++i) z += col[i] * a1[i];
    out += p[l.w3() + j] * std::tanh(z);
  }
  return out;
}

double predict_segment_return(const RewardNet& net, const Segment& segment) {
  double total = 0.0;
  for (const Transition& t : segment.steps()) total += predict_reward(net, t.state, t.action);
  return total;
}

double pref_prob_hat(const RewardNet& net, const Query& query) {
  return pref_prob(1.0, predict_segment_return(net, query.first),
                   predict_segment_return(net, query.second));
}

namespace {

double clamped_ce(const LabelDistribution& label, double p1, double p2) {
  return -(label.mu1 * std::log(std::max(p1, kProbabilityClamp)) +
           label.mu2 * std::log(std::max(p2, kProbabilityClamp)));
}

}  // namespace

double ce_loss(const RewardNet& net, std::span<const PreferenceRecord> batch) {
  if (batch.empty()) throw ContractViolation("ce_loss on an empty batch");
  double total = 0.0;
  for (const PreferenceRecord& r : batch) {
    const double r1 = predict_segment_return(net, r.query.first);
    const double r2 = predict_segment_return(net, r.query.second);
    total += clamped_ce(r.label, pref_prob(1.0, r1, r2), pref_prob(1.0, r2, r1));
  }
  return total / static_cast<double>(batch.size());
}

LossGradient ce_loss_gradient(const RewardNet& net, std::span<const PreferenceRecord> batch) {
  std::vector<const PreferenceRecord*> ptrs;
  ptrs.reserve(batch.size());
  for (const PreferenceRecord& r : batch) ptrs.push_back(&r);
  return ce_loss_gradient(net, std::span<const PreferenceRecord* const>(ptrs));
}

LossGradient ce_loss_gradient(const RewardNet& net,
                              std::span<const PreferenceRecord* const> batch) {
  if (batch.empty()) throw ContractViolation("ce_loss_gradient on an empty batch");
  const Layout l = layout_of(net);
  const VectorXd& p = net.params();

  // Rows: record 0 segment 1, record 0 segment 2, record 1 segment 1, ...
  std::vector<Index> seg_begin;
  seg_begin.reserve(2 * batch.size() + 1);
  Index rows = 0;
  for (const PreferenceRecord* r : batch) {
    seg_begin.push_back(rows);
    rows += static_cast<Index>(r->query.first.length());
    seg_begin.push_back(rows);
    rows += static_cast<Index>(r->query.second.length());
  }
  seg_begin.push_back(rows);

  MatrixXd x(rows, l.in);
  {
    Index row = 0;
    for (const PreferenceRecord* r : batch) {
      for (const Segment* s : {&r->query.first, &r->query.second}) {
        for (const Transition& t : s->steps()) net.encode(t.state, t.action, x.row(row++));
      }
    }
  }

  const auto w1 = matrix_view(p, l.w1(), l.in, l.hidden);
  const auto b1 = vector_view(p, l.b1(), l.hidden);
  const auto w2 = matrix_view(p, l.w2(), l.hidden, l.hidden);
  const auto b2 = vector_view(p, l.b2(), l.hidden);
  const auto w3 = vector_view(p, l.w3(), l.hidden);

  const MatrixXd a1 = ((x * w1).rowwise() + b1.transpose()).array().tanh();
  const MatrixXd a2 = ((a1 * w2).rowwise() + b2.transpose()).array().tanh();
  const VectorXd out = (a2 * w3).array() + p[l.b3()];

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  VectorXd d_out(rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Index s1 = seg_begin[2 * i], s2 = seg_begin[2 * i + 1], end = seg_begin[2 * i + 2];
    const double r1 = out.segment(s1, s2 - s1).sum();
    const double r2 = out.segment(s2, end - s2).sum();
    const double p1 = pref_prob(1.0, r1, r2);
    const double p2 = pref_prob(1.0, r2, r1);
    const LabelDistribution& mu = batch[i]->label;
    loss += clamped_ce(mu, p1, p2);
    // Below the clamp a term is constant and contributes no gradient.
    double d_r1 = 0.0;
    if (p1 >= kProbabilityClamp) d_r1 -= mu.mu1 * p2;
    if (p2 >= kProbabilityClamp) d_r1 += mu.mu2 * p1;
    d_r1 *= inv_b;
    d_out.segment(s1, s2 - s1).setConstant(d_r1);
    d_out.segment(s2, end - s2).setConstant(-d_r1);
  }

  LossGradient result;
  result.loss = loss * inv_b;
  result.gradient = VectorXd::Zero(l.total());
  VectorXd& g = result.gradient;

  matrix_view(g, l.w3(), l.hidden, 1) = a2.transpose() * d_out;
  g[l.b3()] = d_out.sum();
  const MatrixXd dz2 = (d_out * w3.transpose()).array() * (1.0 - a2.array().square());
  matrix_view(g, l.w2(), l.hidden, l.hidden) = a1.transpose() * dz2;
  vector_view(g, l.b2(), l.hidden) = dz2.colwise().sum().transpose();
  const MatrixXd dz1 = (dz2 * w2.transpose()).array() * (1.0 - a1.array().square());
  matrix_view(g, l.w1(), l.in, l.hidden) = x.transpose() * dz1;
  vector_view(g, l.b1(), l.hidden) = dz1.colwise().sum().transpose();
  return result;
}

void validate(const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0)) throw ContractViolation("learning_rate must be >= 0");
  if (config.batch_size <= 0) throw ContractViolation("batch_size must be positive");
  if (config.epochs_per_update <= 0) throw ContractViolation("epochs_per_update must be positive");
  if (!(config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0) ||
      !(config.adam_beta2 >= 0.0 && config.adam_beta2 < 1.0) || !(config.adam_epsilon > 0.0)) {
    throw ContractViolation("invalid Adam hyperparameters");
  }
}

RewardEnsemble::RewardEnsemble(int size, int obs_dim, int action_count, int hidden,
                               RngStream& init_rng) {
  if (size < 1) throw ContractViolation("ensemble needs at least one member");
  for (int i = 0; i < size; ++i) {
    RngStream member_rng = init_rng.split(static_cast<std::uint64_t>(i));
    RewardNet net = RewardNet::random(obs_dim, action_count, hidden, member_rng);
    const Index n = net.param_count();
    members_.push_back({std::move(net), VectorXd::Zero(n), VectorXd::Zero(n), 0});
  }
}

RewardEnsemble::RewardEnsemble(std::vector<RewardNet> members) {
  if (members.empty()) throw ContractViolation("ensemble needs at least one member");
  for (RewardNet& net : members) {
    if (net.input_dim() != members.front().input_dim() || net.hidden() != members.front().hidden()) {
      throw ContractViolation("ensemble members must share an architecture");
    }
    const Index n = net.param_count();
    members_.push_back({std::move(net), VectorXd::Zero(n), VectorXd::Zero(n), 0});
  }
}

double RewardEnsemble::mean_reward(std::span<const double> state, int action) const {
  double total = 0.0;
  for (const Member& m : members_) total += predict_reward(m.net, state, action);
  return total / static_cast<double>(members_.size());
}

std::vector<double> train_update(RewardEnsemble& ensemble, const PreferenceDataset& dataset,
                                 const TrainConfig& config, RngStream& rng) {
  validate(config);
  if (dataset.empty()) throw ContractViolation("train_update on an empty dataset");
  const std::size_t n = dataset.size();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<double> final_losses;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    RewardEnsemble::Member& member = ensemble.members_[i];
    RngStream member_rng = rng.split(i);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const PreferenceRecord*> batch;
    double epoch_loss = 0.0;

    for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
      for (std::size_t j = n; j > 1; --j) {
        std::swap(order[j - 1], order[static_cast<std::size_t>(member_rng.uniform_int(static_cast<int>(j)))]);
      }
      epoch_loss = 0.0;
      for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        batch.clear();
        for (std::size_t j = start; j < stop; ++j) batch.push_back(&dataset[order[j]]);
        const LossGradient lg = ce_loss_gradient(member.net, batch);
        epoch_loss += lg.loss * static_cast<double>(stop - start);

        ++member.adam_steps;
        member.adam_m = config.adam_beta1 * member.adam_m + (1.0 - config.adam_beta1) * lg.gradient;
        member.adam_v = config.adam_beta2 * member.adam_v +
                        (1.0 - config.adam_beta2) * lg.gradient.array().square().matrix();
        const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(member.adam_steps));
        const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(member.adam_steps));
        member.net.params().array() -=
            config.learning_rate * (member.adam_m.array() / c1) /
            ((member.adam_v.array() / c2).sqrt() + config.adam_epsilon);
      }
    }
    final_losses.push_back(epoch_loss / static_cast<double>(n));
  }
  return final_losses;
}

double disagreement_score(const RewardEnsemble& ensemble, const Query& query) {
  std::vector<double> probs;
  probs.reserve(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i) probs.push_back(pref_prob_hat(ensemble.member(i), query));
  const double mean = std::accumulate(probs.begin(), probs.end(), 0.0) / static_cast<double>(probs.size());
  double var = 0.0;
  for (double p : probs) var += (p - mean) * (p - mean);
  return std::sqrt(var / static_cast<double>(probs.size()));
}

GradientCheckResult gradient_check(const RewardNet& net, const PreferenceRecord& record,
                                   double tolerance, RngStream& rng, std::size_t samples,
                                   const GradientFn& analytic) {
  const VectorXd grad = analytic ? analytic(net, record)
                                 : ce_loss_gradient(net, std::span<const PreferenceRecord>(&record, 1)).gradient;
  if (grad.size() != net.param_count()) throw ContractViolation("analytic gradient has wrong size");

  const auto total = static_cast<std::size_t>(net.param_count());
  std::vector<std::size_t> indices(total);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  const std::size_t count = std::min(samples, total);
  for (std::size_t j = 0; j < count; ++j) {
    const auto pick = j + static_cast<std::size_t>(rng.uniform_int(static_cast<int>(total - j)));
    std::swap(indices[j], indices[pick]);
  }

  RewardNet probe = net;
  const std::span<const PreferenceRecord> one(&record, 1);
  GradientCheckResult result;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t idx = indices[j];
    const double original = probe.params()[static_cast<Index>(idx)];
    probe.params()[static_cast<Index>(idx)] = original + kFiniteDifferenceStep;
    const double up = ce_loss(probe, one);
    probe.params()[static_cast<Index>(idx)] = original - kFiniteDifferenceStep;
    const double down = ce_loss(probe, one);
    probe.params()[static_cast<Index>(idx)] = original;
    const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
    const double a = grad[static_cast<Index>(idx)];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    result.max_relative_error = std::max(result.max_relative_error, rel);
  }
  result.parameters_checked = count;
  result.passed = result.max_relative_error <= tolerance;
  return result;
}

void write_checkpoint(std::ostream& out, const RewardNet& net, int member_index) {
  out << "rewardnet v1 obs_dim=" << net.obs_dim() << " action_count=" << net.action_count()
      << " hidden=" << net.hidden() << " member=" << member_index << '\n';
  const VectorXd& p = net.params();
  for (Index i = 0; i < p.size(); ++i) {
    if (i) out << ',';
    out << format_double(p[i]);
  }
  out << '\n';
}

std::pair<RewardNet, int> read_checkpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty checkpoint");
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "rewardnet" || version != "v1") throw std::runtime_error("not a rewardnet v1 checkpoint");
  int obs_dim = -1, action_count = -1, hidden = -1, member = -1;
  std::string token;
  while (hs >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad checkpoint header token " + token);
    const std::string key = token.substr(0, eq);
    const int value = std::stoi(token.substr(eq + 1));
    if (key == "obs_dim") obs_dim = value;
    else if (key == "action_count") action_count = value;
    else if (key == "hidden") hidden = value;
    else if (key == "member") member = value;
    else throw std::runtime_error("unknown checkpoint header key " + key);
  }
  RewardNet net(obs_dim, action_count, hidden);
  std::string body;
  std::getline(in, body);
  std::istringstream bs(body);
  std::string field;
  Index i = 0;
  while (std::getline(bs, field, ',')) {
    if (i >= net.param_count()) throw std::runtime_error("checkpoint has too many parameters");
    net.params()[i++] = parse_double(field);
  }
  if (i != net.param_count()) throw std::runtime_error("checkpoint has too few parameters");
  return {std::move(net), member};
}

}  // namespace teachsim
