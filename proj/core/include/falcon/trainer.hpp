#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "falcon/env.hpp"
#include "falcon/errors.hpp"
#include "falcon/multipliers.hpp"
#include "falcon/policy_net.hpp"
#include "falcon/trajectory.hpp"

namespace falcon {

/// PPO-Lagrangian settings. Defaults follow the published PPO table (clip 0.2,
/// entropy 0.001, multiplier rate 0.035 and init 0.001, GAE lambda 0.95,
/// gamma 0.99, lr 4e-4 with 1% warm-up, 4 epochs, value weight 0.5, gradient
/// norm 0.5); sizes are desk scale.
struct TrainConfig {
  double clip_epsilon = 0.2;
  double entropy_coef = 0.001;
  double lagrangian_lr = 0.035;
  double lagrangian_init = 0.001;
  MultiplierMode multiplier_mode = MultiplierMode::Adam;
  bool freeze_multipliers = false;
  bool normalize_penalty = false;
  double gae_lambda = 0.95;
  double gamma = 0.99;
  double gamma_cost = 1.0;
  double learning_rate = 4e-4;
  double lr_warmup_fraction = 0.01;
  int update_epochs = 4;
  double value_weight = 0.5;
  double max_grad_norm = 0.5;
  int episodes_per_iteration = 16;
  int minibatch_episodes = 4;
  int iterations = 100;
  /// Critic heads regress returns divided by this; 0 means the episode length.
  double value_scale = 0.0;
  Budget budget;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
  MultiplierConfig multiplier_config() const;
};

/// One episode with its advantage and return targets, ready for the loss.
struct PreparedEpisode {
  const Trajectory* trajectory = nullptr;
  std::vector<double> adv_reward;
  std::vector<double> adv_cost;
  std::vector<double> ret_reward;
  std::vector<double> ret_cost;
};

struct LossReport {
  double total = 0.0;
  double policy_loss = 0.0;     // -J_r (clipped surrogate)
  double cost_upper = 0.0;      // pessimistic surrogate for the upper bound
  double cost_lower = 0.0;      // pessimistic surrogate for the lower bound
  double value_loss_reward = 0.0;
  double value_loss_cost = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

/// min(r A, clip(r, 1 - eps, 1 + eps) A): the clipped surrogate for a signal
/// being maximized.
double clipped_surrogate(double ratio, double advantage, double epsilon);

/// max(r A, clip(r, 1 - eps, 1 + eps) A): the pessimistic surrogate for a cost
/// being pushed down.
double pessimistic_cost_surrogate(double ratio, double advantage, double epsilon);

/// loss = -J_r + w_u * J_c^up - w_l * J_c^low
///        + value_weight * (MSE_reward + MSE_cost) - entropy_coef * entropy,
/// averaged over every transition in `batch`. w = lambda (or lambda /
/// (1 + lambda_u + lambda_l) with normalize_penalty). Ratio r = exp(logp -
/// logp_old). J_r and J_c^low use min(r A, clip(r) A); J_c^up uses max(...),
/// the pessimistic side for a cost that is being pushed down. When `grad` is
/// non-null the exact gradient is added into it. NumericError on a non-finite
/// loss.
LossReport ppo_losses(const PolicyNet& net, const PolicyParams& params, std::span<const PreparedEpisode* const> batch,
                      const Multipliers& multipliers, const TrainConfig& config, double value_scale,
                      Eigen::VectorXd* grad);

/// Runs `n_episodes` episodes [first_episode, first_episode + n) with actions
/// sampled from the current policy and stores log-probs and value estimates
/// (in return units). Each episode samples fresh fatigue parameters and starts
/// from a reset hidden state.
std::vector<Trajectory> collect(const PolicyNet& net, const PolicyParams& params, const EpisodeConfig& env,
                                int n_episodes, std::uint64_t first_episode, std::uint64_t policy_seed,
                                double value_scale, int workers = 1);

/// Reward and cost targets for every episode, with both advantage sets
/// normalized across the whole collection.
std::vector<PreparedEpisode> prepare_batch(std::span<const Trajectory> trajectories, const TrainConfig& config);

struct IterationLog {
  int iteration = 0;
  double mean_reward = 0.0;  // per-step accuracy
  double cost_fraction = 0.0;
  double coverage = 0.0;
  double lambda_u = 0.0;
  double lambda_l = 0.0;
  double policy_loss = 0.0;
  double value_loss_reward = 0.0;
  double value_loss_cost = 0.0;
  double entropy = 0.0;
  double learning_rate = 0.0;
};

void write_training_log_header(std::ostream& out);
void write_training_log_row(std::ostream& out, const IterationLog& row);

struct TrainResult {
  PolicyParams params;
  Multipliers multipliers;
  std::vector<IterationLog> log;
};

/// Raised when parameters become non-finite; carries the last good parameters.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, PolicyParams last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const PolicyParams& last_good() const noexcept { return last_good_; }

 private:
  PolicyParams last_good_;
};

using IterationCallback = std::function<void(const IterationLog&, const PolicyParams&, const Multipliers&)>;

/// Adam with linear warm-up then cosine decay to zero over all update steps.
double scheduled_learning_rate(const TrainConfig& config, long update_step, long total_updates);

/// Global-norm clipping; returns the norm before clipping.
double clip_gradient_norm(Eigen::VectorXd& grad, double max_norm);

/// Episode indices [0, episodes) shuffled with a stream keyed by (seed,
/// iteration, epoch) and cut into consecutive minibatches of `minibatch`.
std::vector<std::vector<int>> episode_minibatches(int episodes, int minibatch, std::uint64_t seed, int iteration,
                                                  int epoch);

/// The full loop: collect, update multipliers, compute advantages, then
/// `update_epochs` passes of shuffled episode minibatches.
TrainResult train(const TrainConfig& config, const EpisodeConfig& env, const PolicyNet& net, PolicyParams initial,
                  const IterationCallback& on_iteration = {});

}  // namespace falcon
