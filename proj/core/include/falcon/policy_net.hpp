#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "falcon/param_layout.hpp"
#include "falcon/random.hpp"
#include "falcon/trajectory.hpp"

namespace falcon {

/// Widths of the actor / dual-critic network.
///
///   features --affine+relu--> encoder (encoder_dim)
///   rho / L  --affine------> workload embedding (workload_embed_dim)
///   [encoder; embedding] --gated recurrence--> h (hidden_dim)
///   h --2-layer relu MLP--> {action logits (2), reward value, cost value}
///
/// The recurrence is h' = (1 - g) * h + g * tanh(Wc z + Uc h + bc) with
/// g = sigmoid(Wg z + Ug h + bg), reset to zeros at episode start.
struct NetConfig {
  int feature_dim = 8;
  int encoder_dim = 32;
  int workload_embed_dim = 8;
  int hidden_dim = 64;
  int head_dim = 64;

  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

ParamLayout make_layout(const NetConfig& config);

struct PolicyParams {
  NetConfig config;
  ParamLayout layout;
  Eigen::VectorXd values;

  /// 64-bit FNV-1a over the raw parameter bytes.
  std::uint64_t hash() const;
  bool operator==(const PolicyParams& other) const;
};

PolicyParams zero_params(const NetConfig& config);

/// Weights uniform in +-1/sqrt(fan_in), biases zero. The actor's output layer
/// is scaled by 0.01 so the initial policy is close to uniform.
PolicyParams init_params(const NetConfig& config, std::uint64_t seed);

struct RecurrentState {
  Eigen::VectorXd h;
  bool reset = true;
};

struct Observation {
  std::span<const double> features;
  double workload_fraction = 0.0;
};

struct NetOutput {
  std::array<double, 2> action_logits{};
  double reward_value = 0.0;
  double cost_value = 0.0;
  RecurrentState next_hidden;
};

/// B episodes of equal length T, time-major: column t * B + b holds step t of
/// episode b.
struct SequenceBatch {
  int steps = 0;
  int episodes = 0;
  Eigen::MatrixXd features;           // feature_dim x (T*B)
  Eigen::RowVectorXd workload_frac;   // 1 x (T*B)

  static SequenceBatch from_trajectories(std::span<const Trajectory* const> trajectories);
  int columns() const noexcept { return steps * episodes; }
};

struct SequenceOutputs {
  Eigen::MatrixXd logits;           // 2 x (T*B); row 0 = AI, row 1 = Human
  Eigen::RowVectorXd reward_value;  // 1 x (T*B)
  Eigen::RowVectorXd cost_value;
};

/// Loss gradients with respect to every output column.
struct OutputGrads {
  Eigen::MatrixXd logits;
  Eigen::RowVectorXd reward_value;
  Eigen::RowVectorXd cost_value;

  static OutputGrads zeros(int columns);
};

/// Activations kept by forward_sequences for backward_sequences.
struct SequenceTape {
  Eigen::MatrixXd enc_pre, z, h_prev, gate, cand, h;
  std::array<Eigen::MatrixXd, 3> head_pre;  // actor, reward, cost
};

class PolicyNet {
 public:
  explicit PolicyNet(NetConfig config);

  const NetConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  int observation_dim() const noexcept { return config_.feature_dim; }

  /// One step. The hidden state is treated as zeros when `hidden.reset` is set
  /// or `hidden.h` is empty. ConfigError on a feature-width mismatch.
  NetOutput forward(const PolicyParams& params, const Observation& obs, const RecurrentState& hidden) const;

  /// One step for B independent episodes; `hidden` (hidden_dim x B) is updated
  /// in place.
  void forward_step(const PolicyParams& params, const Eigen::MatrixXd& features,
                    const Eigen::RowVectorXd& workload_frac, Eigen::MatrixXd& hidden, SequenceOutputs& out) const;

  /// Whole episodes from a zero hidden state. Fills `tape` when non-null.
  void forward_sequences(const PolicyParams& params, const SequenceBatch& batch, SequenceOutputs& out,
                         SequenceTape* tape) const;

  /// Back-propagation through time. Adds dLoss/dparams into `grad`, which has
  /// the same layout as the parameter vector.
  void backward_sequences(const PolicyParams& params, const SequenceBatch& batch, const SequenceTape& tape,
                          const OutputGrads& grads, Eigen::VectorXd& grad) const;

 private:
  struct Blocks {
    ParamBlock enc_w, enc_b, wl_w, wl_b;
    ParamBlock gate_wx, gate_wh, gate_b, cand_wx, cand_wh, cand_b;
    std::array<ParamBlock, 3> w1, b1, w2, b2;  // actor, reward, cost
  };

  void check(const PolicyParams& params) const;

  NetConfig config_;
  ParamLayout layout_;
  Blocks blocks_;
};

/// Log-softmax of a two-way logit pair.
std::array<double, 2> log_softmax(double logit_ai, double logit_human);

/// Samples from softmax(logits); returns the action and its log-probability.
std::pair<Action, double> sample_action(std::span<const double, 2> logits, Rng& rng);

/// Argmax with ties going to AI.
Action greedy_action(std::span<const double, 2> logits);

// Checkpoint text format:
//   falcon-checkpoint <version>
//   config <feature_dim> <encoder_dim> <workload_embed_dim> <hidden_dim> <head_dim>
//   blocks <n>
//   <name> <rows> <cols> <offset>      (n lines)
//   values <count>
//   <hex float>                        (count lines)
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::filesystem::path& path);
std::string serialize_checkpoint(const PolicyParams& params);
PolicyParams parse_checkpoint(const std::string& text);

}  // namespace falcon
