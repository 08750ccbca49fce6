#include <algorithm>
#include <cmath>

#include "falcon/baselines.hpp"
#include "falcon/errors.hpp"

namespace falcon {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using MutMap = Eigen::Map<MatrixXd>;

struct GateBlocks {
  ParamBlock w1, b1, w2, b2;
  explicit GateBlocks(const ParamLayout& l)
      : w1(l.find("fc1.weight")), b1(l.find("fc1.bias")), w2(l.find("fc2.weight")), b2(l.find("fc2.bias")) {}
};

ConstMap view(const VectorXd& v, const ParamBlock& b) { return ConstMap(v.data() + b.offset, b.rows, b.cols); }
MutMap view(VectorXd& v, const ParamBlock& b) { return MutMap(v.data() + b.offset, b.rows, b.cols); }

// Logits of g for each column; fills the hidden pre-activation when asked.
RowVectorXd gate_logits(const StaticGate& gate, const MatrixXd& x, MatrixXd* pre_out) {
  const GateBlocks bl(gate.layout);
  MatrixXd pre = view(gate.values, bl.w1) * x;
  pre.colwise() += view(gate.values, bl.b1).col(0);
  RowVectorXd logit = view(gate.values, bl.w2) * pre.cwiseMax(0.0);
  logit.array() += gate.values[bl.b2.offset];
  if (pre_out) *pre_out = std::move(pre);
  return logit;
}

double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

}  // namespace

void StaticGateConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("static gate hidden_dim must be >= 1");
  if (epochs < 0) throw ConfigError("static gate epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("static gate learning_rate must be > 0");
  if (human_accuracy && !(*human_accuracy >= 0.0 && *human_accuracy <= 1.0)) {
    throw ConfigError("static gate human_accuracy must lie in [0, 1]");
  }
}

StaticGate init_static_gate(int feature_dim, int hidden_dim, std::uint64_t seed) {
  if (feature_dim < 1 || hidden_dim < 1) throw ConfigError("static gate widths must be >= 1");
  StaticGate gate;
  gate.feature_dim = feature_dim;
  gate.hidden_dim = hidden_dim;
  gate.layout.add("fc1.weight", hidden_dim, feature_dim);
  gate.layout.add("fc1.bias", hidden_dim, 1);
  gate.layout.add("fc2.weight", 1, hidden_dim);
  gate.layout.add("fc2.bias", 1, 1);
  gate.values = VectorXd::Zero(static_cast<Eigen::Index>(gate.layout.total_size()));
  auto rng = make_rng(seed, {stream::kInit, 0x6a7e});
  const GateBlocks bl(gate.layout);
  for (const ParamBlock* b : {&bl.w1, &bl.w2}) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(b->cols));
    for (std::size_t i = 0; i < b->size(); ++i) gate.values[b->offset + i] = uniform(rng, -bound, bound);
  }
  return gate;
}

double StaticGate::defer_probability(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim) throw ConfigError("static gate feature width mismatch");
  const MatrixXd x = Eigen::Map<const MatrixXd>(features.data(), feature_dim, 1);
  return defer_probabilities(x)(0);
}

RowVectorXd StaticGate::defer_probabilities(const MatrixXd& features) const {
  const RowVectorXd z = gate_logits(*this, features, nullptr);
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

double static_gate_loss(const StaticGate& gate, const MatrixXd& features, const RowVectorXd& targets,
                        const RowVectorXd& weights, VectorXd* grad) {
  const auto n = features.cols();
  if (n == 0) return 0.0;
  MatrixXd pre;
  const RowVectorXd z = gate_logits(gate, features, &pre);
  double loss = 0.0;
  RowVectorXd dz(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = targets(i);
    loss -= weights(i) * (y * log_sigmoid(z(i)) + (1.0 - y) * log_sigmoid(-z(i)));
    const double p = 1.0 / (1.0 + std::exp(-z(i)));
    dz(i) = weights(i) * (p - y) / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw NumericError("non-finite static gate loss");
  if (grad) {
    const GateBlocks bl(gate.layout);
    const MatrixXd hidden = pre.cwiseMax(0.0);
    view(*grad, bl.w2) += dz * hidden.transpose();
    (*grad)[bl.b2.offset] += dz.sum();
    const MatrixXd dpre = ((view(gate.values, bl.w2).transpose() * dz).array() * (pre.array() > 0.0).cast<double>())
                              .matrix();
    view(*grad, bl.w1) += dpre * features.transpose();
    view(*grad, bl.b1) += dpre.rowwise().sum();
  }
  return loss;
}

double mean_human_accuracy(const FatigueSource& source, int horizon, int samples, std::uint64_t seed) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  auto curve_mean = [horizon](const FatigueParams& p) {
    double s = 0.0;
    for (int rho = 1; rho <= horizon; ++rho) s += performance(p, rho);
    return s / horizon;
  };
  if (const auto* fixed = std::get_if<FatigueParams>(&source)) return curve_mean(*fixed);
  if (samples < 1) throw ConfigError("samples must be >= 1");
  auto rng = make_rng(seed, {stream::kBaseline, 0x5a3});
  double total = 0.0;
  for (int i = 0; i < samples; ++i) total += curve_mean(sample_params(std::get<FatigueParamRanges>(source), rng));
  return total / samples;
}

StaticGate train_static_gate(std::span<const TaskInstance> instances, double human_accuracy,
                             const StaticGateConfig& config) {
  config.validate();
  if (instances.empty()) throw ConfigError("static gate needs training instances");
  const int d = static_cast<int>(instances.front().features.size());
  const auto n = static_cast<Eigen::Index>(instances.size());
  MatrixXd x(d, n);
  RowVectorXd targets(n), weights(n);
  const double human_error = 1.0 - human_accuracy;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    if (static_cast<int>(inst.features.size()) != d) throw SchemaError("inconsistent feature width");
    for (int j = 0; j < d; ++j) x(j, i) = inst.features[j];
    const double ai_error = ai_predict(inst) == inst.label ? 0.0 : 1.0;
    targets(i) = ai_error > human_error ? 1.0 : 0.0;
    weights(i) = std::abs(ai_error - human_error);
  }

  StaticGate gate = init_static_gate(d, config.hidden_dim, config.seed);
  VectorXd m = VectorXd::Zero(gate.values.size());
  VectorXd v = VectorXd::Zero(gate.values.size());
  VectorXd grad(gate.values.size());
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    grad.setZero();
    static_gate_loss(gate, x, targets, weights, &grad);
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, epoch);
    const double c2 = 1.0 - std::pow(b2, epoch);
    gate.values.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    if (!gate.values.allFinite()) throw NumericError("static gate parameters became non-finite");
  }
  return gate;
}

}  // namespace falcon
