#include "falcon/policy_net.hpp"

#include <cmath>
#include <cstring>

#include "falcon/errors.hpp"

namespace falcon {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using MutMap = Eigen::Map<MatrixXd>;

constexpr std::array<const char*, 3> kHeadNames = {"actor", "reward", "cost"};
constexpr std::array<int, 3> kHeadOut = {2, 1, 1};

ConstMap view(const VectorXd& v, const ParamBlock& b) { return ConstMap(v.data() + b.offset, b.rows, b.cols); }
MutMap view(VectorXd& v, const ParamBlock& b) { return MutMap(v.data() + b.offset, b.rows, b.cols); }

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }
MatrixXd relu_mask(const MatrixXd& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }
MatrixXd sigmoid(const MatrixXd& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

}  // namespace

void NetConfig::validate() const {
  if (feature_dim < 1 || encoder_dim < 1 || workload_embed_dim < 1 || hidden_dim < 1 || head_dim < 1) {
    throw ConfigError("widths: must all be >= 1");
  }
}

ParamLayout make_layout(const NetConfig& c) {
  c.validate();
  const int zdim = c.encoder_dim + c.workload_embed_dim;
  ParamLayout l;
  l.add("encoder.weight", c.encoder_dim, c.feature_dim);
  l.add("encoder.bias", c.encoder_dim, 1);
  l.add("workload.weight", c.workload_embed_dim, 1);
  l.add("workload.bias", c.workload_embed_dim, 1);
  l.add("gate.input_weight", c.hidden_dim, zdim);
  l.add("gate.hidden_weight", c.hidden_dim, c.hidden_dim);
  l.add("gate.bias", c.hidden_dim, 1);
  l.add("candidate.input_weight", c.hidden_dim, zdim);
  l.add("candidate.hidden_weight", c.hidden_dim, c.hidden_dim);
  l.add("candidate.bias", c.hidden_dim, 1);
  for (int k = 0; k < 3; ++k) {
    const std::string h = kHeadNames[k];
    l.add(h + ".fc1.weight", c.head_dim, c.hidden_dim);
    l.add(h + ".fc1.bias", c.head_dim, 1);
    l.add(h + ".fc2.weight", kHeadOut[k], c.head_dim);
    l.add(h + ".fc2.bias", kHeadOut[k], 1);
  }
  return l;
}

std::uint64_t PolicyParams::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(values.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool PolicyParams::operator==(const PolicyParams& other) const {
  return config == other.config && layout == other.layout && values.size() == other.values.size() &&
         std::memcmp(values.data(), other.values.data(), sizeof(double) * values.size()) == 0;
}

PolicyParams zero_params(const NetConfig& config) {
  PolicyParams p;
  p.config = config;
  p.layout = make_layout(config);
  p.values = VectorXd::Zero(static_cast<Eigen::Index>(p.layout.total_size()));
  return p;
}

PolicyParams init_params(const NetConfig& config, std::uint64_t seed) {
  auto p = zero_params(config);
  auto rng = make_rng(seed, {stream::kInit});
  for (const auto& b : p.layout.blocks()) {
    if (b.name.ends_with("bias")) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(b.cols));
    const double scale = b.name == "actor.fc2.weight" ? 0.01 : 1.0;
    auto w = view(p.values, b);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * uniform(rng, -bound, bound);
    }
  }
  return p;
}

SequenceBatch SequenceBatch::from_trajectories(std::span<const Trajectory* const> trajectories) {
  SequenceBatch batch;
  if (trajectories.empty()) return batch;
  batch.steps = trajectories.front()->length();
  batch.episodes = static_cast<int>(trajectories.size());
  const int d = trajectories.front()->feature_dim;
  batch.features.resize(d, batch.columns());
  batch.workload_frac.resize(batch.columns());
  for (int b = 0; b < batch.episodes; ++b) {
    const auto& tr = *trajectories[b];
    if (tr.length() != batch.steps || tr.feature_dim != d) {
      throw ConfigError("sequence batch needs episodes of equal length and width");
    }
    for (int t = 0; t < batch.steps; ++t) {
      const int col = t * batch.episodes + b;
      auto obs = tr.observation(t);
      for (int i = 0; i < d; ++i) batch.features(i, col) = obs[i];
      batch.workload_frac(col) = tr.workload_fraction[t];
    }
  }
  return batch;
}

OutputGrads OutputGrads::zeros(int columns) {
  return {MatrixXd::Zero(2, columns), RowVectorXd::Zero(columns), RowVectorXd::Zero(columns)};
}

PolicyNet::PolicyNet(NetConfig config) : config_(config), layout_(make_layout(config)) {
  blocks_.enc_w = layout_.find("encoder.weight");
  blocks_.enc_b = layout_.find("encoder.bias");
  blocks_.wl_w = layout_.find("workload.weight");
  blocks_.wl_b = layout_.find("workload.bias");
  blocks_.gate_wx = layout_.find("gate.input_weight");
  blocks_.gate_wh = layout_.find("gate.hidden_weight");
  blocks_.gate_b = layout_.find("gate.bias");
  blocks_.cand_wx = layout_.find("candidate.input_weight");
  blocks_.cand_wh = layout_.find("candidate.hidden_weight");
  blocks_.cand_b = layout_.find("candidate.bias");
  for (int k = 0; k < 3; ++k) {
    const std::string h = kHeadNames[k];
    blocks_.w1[k] = layout_.find(h + ".fc1.weight");
    blocks_.b1[k] = layout_.find(h + ".fc1.bias");
    blocks_.w2[k] = layout_.find(h + ".fc2.weight");
    blocks_.b2[k] = layout_.find(h + ".fc2.bias");
  }
}

void PolicyNet::check(const PolicyParams& params) const {
  if (!(params.config == config_) || static_cast<std::size_t>(params.values.size()) != layout_.total_size()) {
    throw ConfigError("policy parameters do not match the network configuration");
  }
}

NetOutput PolicyNet::forward(const PolicyParams& params, const Observation& obs, const RecurrentState& hidden) const {
  if (static_cast<int>(obs.features.size()) != config_.feature_dim) {
    throw ConfigError("observation width " + std::to_string(obs.features.size()) + " != encoder input width " +
                      std::to_string(config_.feature_dim));
  }
  MatrixXd x = Eigen::Map<const VectorXd>(obs.features.data(), config_.feature_dim);
  RowVectorXd frac(1);
  frac(0) = obs.workload_fraction;
  MatrixXd h = (hidden.reset || hidden.h.size() == 0) ? MatrixXd::Zero(config_.hidden_dim, 1) : MatrixXd(hidden.h);
  SequenceOutputs out;
  forward_step(params, x, frac, h, out);
  NetOutput result;
  result.action_logits = {out.logits(0, 0), out.logits(1, 0)};
  result.reward_value = out.reward_value(0);
  result.cost_value = out.cost_value(0);
  result.next_hidden.h = h.col(0);
  result.next_hidden.reset = false;
  return result;
}

void PolicyNet::forward_step(const PolicyParams& params, const MatrixXd& x, const RowVectorXd& frac,
                             MatrixXd& h, SequenceOutputs& out) const {
  check(params);
  const auto& v = params.values;
  const auto& bl = blocks_;
  const Eigen::Index n = x.cols();
  MatrixXd z(config_.encoder_dim + config_.workload_embed_dim, n);
  z.topRows(config_.encoder_dim) = relu((view(v, bl.enc_w) * x).colwise() + view(v, bl.enc_b).col(0));
  z.bottomRows(config_.workload_embed_dim) = (view(v, bl.wl_w) * frac).colwise() + view(v, bl.wl_b).col(0);
  const MatrixXd g =
      sigmoid((view(v, bl.gate_wx) * z + view(v, bl.gate_wh) * h).colwise() + view(v, bl.gate_b).col(0));
  const MatrixXd c =
      ((view(v, bl.cand_wx) * z + view(v, bl.cand_wh) * h).colwise() + view(v, bl.cand_b).col(0)).array().tanh().matrix();
  h = ((1.0 - g.array()) * h.array() + g.array() * c.array()).matrix();

  std::array<MatrixXd, 3> head;
  for (int k = 0; k < 3; ++k) {
    const MatrixXd r = relu((view(v, bl.w1[k]) * h).colwise() + view(v, bl.b1[k]).col(0));
    head[k] = (view(v, bl.w2[k]) * r).colwise() + view(v, bl.b2[k]).col(0);
  }
  out.logits = std::move(head[0]);
  out.reward_value = head[1].row(0);
  out.cost_value = head[2].row(0);
}

void PolicyNet::forward_sequences(const PolicyParams& params, const SequenceBatch& batch, SequenceOutputs& out,
                                  SequenceTape* tape) const {
  check(params);
  if (batch.features.rows() != config_.feature_dim) {
    throw ConfigError("observation width does not match encoder input width");
  }
  const auto& v = params.values;
  const auto& bl = blocks_;
  const int T = batch.steps;
  const int B = batch.episodes;
  const int H = config_.hidden_dim;
  const Eigen::Index n = batch.columns();

  SequenceTape local;
  SequenceTape& tp = tape ? *tape : local;
  tp.enc_pre = (view(v, bl.enc_w) * batch.features).colwise() + view(v, bl.enc_b).col(0);
  tp.z.resize(config_.encoder_dim + config_.workload_embed_dim, n);
  tp.z.topRows(config_.encoder_dim) = relu(tp.enc_pre);
  tp.z.bottomRows(config_.workload_embed_dim) =
      (view(v, bl.wl_w) * batch.workload_frac).colwise() + view(v, bl.wl_b).col(0);

  const MatrixXd gate_in = (view(v, bl.gate_wx) * tp.z).colwise() + view(v, bl.gate_b).col(0);
  const MatrixXd cand_in = (view(v, bl.cand_wx) * tp.z).colwise() + view(v, bl.cand_b).col(0);
  tp.h_prev.resize(H, n);
  tp.gate.resize(H, n);
  tp.cand.resize(H, n);
  tp.h.resize(H, n);
  MatrixXd h = MatrixXd::Zero(H, B);
  for (int t = 0; t < T; ++t) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(t) * B;
    tp.h_prev.middleCols(c0, B) = h;
    const MatrixXd g = sigmoid(gate_in.middleCols(c0, B) + view(v, bl.gate_wh) * h);
    const MatrixXd c = (cand_in.middleCols(c0, B) + view(v, bl.cand_wh) * h).array().tanh().matrix();
    h = ((1.0 - g.array()) * h.array() + g.array() * c.array()).matrix();
    tp.gate.middleCols(c0, B) = g;
    tp.cand.middleCols(c0, B) = c;
    tp.h.middleCols(c0, B) = h;
  }

  std::array<MatrixXd, 3> head;
  for (int k = 0; k < 3; ++k) {
    tp.head_pre[k] = (view(v, bl.w1[k]) * tp.h).colwise() + view(v, bl.b1[k]).col(0);
    head[k] = (view(v, bl.w2[k]) * relu(tp.head_pre[k])).colwise() + view(v, bl.b2[k]).col(0);
  }
  out.logits = std::move(head[0]);
  out.reward_value = head[1].row(0);
  out.cost_value = head[2].row(0);
}

void PolicyNet::backward_sequences(const PolicyParams& params, const SequenceBatch& batch, const SequenceTape& tp,
                                   const OutputGrads& grads, VectorXd& grad) const {
  check(params);
  if (grad.size() != params.values.size()) grad = VectorXd::Zero(params.values.size());
  const auto& v = params.values;
  const auto& bl = blocks_;
  const int T = batch.steps;
  const int B = batch.episodes;
  const int H = config_.hidden_dim;
  const Eigen::Index n = batch.columns();

  MatrixXd dh_heads = MatrixXd::Zero(H, n);
  for (int k = 0; k < 3; ++k) {
    MatrixXd d_out;
    if (k == 0) {
      d_out = grads.logits;
    } else {
      d_out = k == 1 ? MatrixXd(grads.reward_value) : MatrixXd(grads.cost_value);
    }
    const MatrixXd r = relu(tp.head_pre[k]);
    view(grad, bl.w2[k]).noalias() += d_out * r.transpose();
    view(grad, bl.b2[k]).col(0) += d_out.rowwise().sum();
    const MatrixXd d_pre = ((view(v, bl.w2[k]).transpose() * d_out).array() * (tp.head_pre[k].array() > 0.0).cast<double>()).matrix();
    view(grad, bl.w1[k]).noalias() += d_pre * tp.h.transpose();
    view(grad, bl.b1[k]).col(0) += d_pre.rowwise().sum();
    dh_heads.noalias() += view(v, bl.w1[k]).transpose() * d_pre;
  }

  MatrixXd d_gate_in(H, n);
  MatrixXd d_cand_in(H, n);
  MatrixXd dh_next = MatrixXd::Zero(H, B);
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(t) * B;
    const auto g = tp.gate.middleCols(c0, B).array();
    const auto c = tp.cand.middleCols(c0, B).array();
    const auto hp = tp.h_prev.middleCols(c0, B).array();
    const Eigen::ArrayXXd dh = dh_heads.middleCols(c0, B).array() + dh_next.array();
    d_gate_in.middleCols(c0, B) = (dh * (c - hp) * g * (1.0 - g)).matrix();
    d_cand_in.middleCols(c0, B) = (dh * g * (1.0 - c * c)).matrix();
    dh_next = (dh * (1.0 - g)).matrix();
    dh_next.noalias() += view(v, bl.gate_wh).transpose() * d_gate_in.middleCols(c0, B);
    dh_next.noalias() += view(v, bl.cand_wh).transpose() * d_cand_in.middleCols(c0, B);
  }

  view(grad, bl.gate_wx).noalias() += d_gate_in * tp.z.transpose();
  view(grad, bl.gate_wh).noalias() += d_gate_in * tp.h_prev.transpose();
  view(grad, bl.gate_b).col(0) += d_gate_in.rowwise().sum();
  view(grad, bl.cand_wx).noalias() += d_cand_in * tp.z.transpose();
  view(grad, bl.cand_wh).noalias() += d_cand_in * tp.h_prev.transpose();
  view(grad, bl.cand_b).col(0) += d_cand_in.rowwise().sum();

  MatrixXd dz = view(v, bl.gate_wx).transpose() * d_gate_in;
  dz.noalias() += view(v, bl.cand_wx).transpose() * d_cand_in;
  const MatrixXd d_enc =
      (dz.topRows(config_.encoder_dim).array() * relu_mask(tp.enc_pre).array()).matrix();
  view(grad, bl.enc_w).noalias() += d_enc * batch.features.transpose();
  view(grad, bl.enc_b).col(0) += d_enc.rowwise().sum();
  const auto d_wl = dz.bottomRows(config_.workload_embed_dim);
  view(grad, bl.wl_w).noalias() += d_wl * batch.workload_frac.transpose();
  view(grad, bl.wl_b).col(0) += d_wl.rowwise().sum();
}

std::array<double, 2> log_softmax(double a, double b) {
  const double m = std::max(a, b);
  const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
  return {a - lse, b - lse};
}

std::pair<Action, double> sample_action(std::span<const double, 2> logits, Rng& rng) {
  const auto lp = log_softmax(logits[0], logits[1]);
  const double p_human = std::exp(lp[1]);
  if (uniform01(rng) < p_human) return {Action::Human, lp[1]};
  return {Action::AI, lp[0]};
}

Action greedy_action(std::span<const double, 2> logits) {
  return logits[1] > logits[0] ? Action::Human : Action::AI;
}

}  // namespace falcon
