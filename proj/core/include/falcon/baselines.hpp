#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "falcon/actors.hpp"
#include "falcon/env.hpp"
#include "falcon/param_layout.hpp"
#include "falcon/random.hpp"

namespace falcon {

/// A deferral rule driven step by step through an episode.
class Deferrer {
 public:
  virtual ~Deferrer() = default;
  virtual std::string name() const = 0;
  /// Called after every env reset.
  virtual void begin_episode(std::uint64_t /*episode_index*/) {}
  virtual Action act(const EnvState& state, const TaskInstance& instance) = 0;
};

/// Human with probability 1 - target_coverage.
Action policy_random(double target_coverage, Rng& rng);

/// Human iff ai_confidence < tau. ConfigError when the instance has no confidence.
Action threshold_policy(const TaskInstance& instance, double tau);

class AiOnlyDeferrer final : public Deferrer {
 public:
  std::string name() const override { return "ai_only"; }
  Action act(const EnvState&, const TaskInstance&) override { return Action::AI; }
};

class HumanOnlyDeferrer final : public Deferrer {
 public:
  std::string name() const override { return "human_only"; }
  Action act(const EnvState&, const TaskInstance&) override { return Action::Human; }
};

/// Coin flips drawn from a stream keyed by (seed, episode).
class RandomDeferrer final : public Deferrer {
 public:
  RandomDeferrer(double target_coverage, std::uint64_t seed);
  std::string name() const override { return "random"; }
  void begin_episode(std::uint64_t episode_index) override;
  Action act(const EnvState&, const TaskInstance&) override { return policy_random(target_coverage_, rng_); }

 private:
  double target_coverage_;
  std::uint64_t seed_;
  Rng rng_;
};

class ThresholdDeferrer final : public Deferrer {
 public:
  explicit ThresholdDeferrer(double tau) : tau_(tau) {}
  std::string name() const override { return "threshold"; }
  Action act(const EnvState&, const TaskInstance& instance) override { return threshold_policy(instance, tau_); }

 private:
  double tau_;
};

/// Confidence threshold whose deferral rate on `instances` is closest to
/// 1 - target_coverage (an empirical quantile).
double threshold_for_coverage(std::span<const TaskInstance> instances, double target_coverage);

/// One-hidden-layer perceptron over instance features giving g(x) = P(defer).
/// Workload is not an input, so a decision never depends on rho.
struct StaticGate {
  int feature_dim = 0;
  int hidden_dim = 0;
  ParamLayout layout;
  Eigen::VectorXd values;

  double defer_probability(std::span<const double> features) const;
  /// Defer probabilities for a d x n matrix of feature columns.
  Eigen::RowVectorXd defer_probabilities(const Eigen::MatrixXd& features) const;
};

struct StaticGateConfig {
  int hidden_dim = 32;
  int epochs = 300;
  double learning_rate = 1e-2;
  /// Static human accuracy h. Empty: time-average of the fatigue curves.
  std::optional<double> human_accuracy;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mean of performance(w, rho) over rho = 1..horizon, averaged over
/// `samples` draws when `source` holds ranges.
double mean_human_accuracy(const FatigueSource& source, int horizon, int samples, std::uint64_t seed);

/// Cost-weighted cross-entropy surrogate of
///   E[(1 - g(x)) I[m(x) != y] + g(x) (1 - h)]
/// where each instance's target is the cheaper side and its weight is
/// |I[m(x) != y] - (1 - h)|. Full-batch Adam. NumericError on a non-finite loss.
StaticGate train_static_gate(std::span<const TaskInstance> instances, double human_accuracy,
                             const StaticGateConfig& config);

/// Surrogate loss and (optionally) its gradient; exposed for gradient checks.
double static_gate_loss(const StaticGate& gate, const Eigen::MatrixXd& features, const Eigen::RowVectorXd& targets,
                        const Eigen::RowVectorXd& weights, Eigen::VectorXd* grad);

StaticGate init_static_gate(int feature_dim, int hidden_dim, std::uint64_t seed);

/// Defer iff g(x) >= threshold.
class StaticGateDeferrer final : public Deferrer {
 public:
  StaticGateDeferrer(std::shared_ptr<const StaticGate> gate, double threshold)
      : gate_(std::move(gate)), threshold_(threshold) {}
  std::string name() const override { return "static_gate"; }
  Action act(const EnvState& state, const TaskInstance& instance) override;

 private:
  std::shared_ptr<const StaticGate> gate_;
  double threshold_;
};

/// Gate threshold whose deferral rate on `instances` is closest to 1 - target_coverage.
double gate_threshold_for_coverage(const StaticGate& gate, std::span<const TaskInstance> instances,
                                   double target_coverage);

}  // namespace falcon
