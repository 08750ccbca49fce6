#include "falcon/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "falcon/returns.hpp"

namespace falcon {

namespace {

// Episodes stepped together through the batched forward pass. Fixed so the
// arithmetic does not depend on the worker count.
constexpr int kLockstepGroup = 8;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void run_group(const PolicyNet& net, const PolicyParams& params, const EpisodeConfig& env_config,
               std::uint64_t first_episode, std::uint64_t policy_seed, double value_scale,
               std::span<Trajectory> out) {
  const int B = static_cast<int>(out.size());
  const int T = env_config.length;
  const int d = env_config.source->feature_dim();

  std::vector<DeferralEnv> envs;
  std::vector<Rng> rngs;
  std::vector<EnvState> states;
  envs.reserve(B);
  for (int b = 0; b < B; ++b) {
    const std::uint64_t ep = first_episode + static_cast<std::uint64_t>(b);
    envs.emplace_back(env_config);
    states.push_back(envs.back().reset(ep));
    rngs.push_back(make_rng(policy_seed, {stream::kPolicy, ep}));
    Trajectory& tr = out[b];
    tr = Trajectory{};
    tr.seed = env_config.seed;
    tr.episode_index = ep;
    tr.fatigue = envs.back().fatigue();
    tr.feature_dim = d;
    tr.features.reserve(static_cast<std::size_t>(T) * d);
  }

  Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(net.config().hidden_dim, B);
  Eigen::MatrixXd features(d, B);
  Eigen::RowVectorXd workload(B);
  SequenceOutputs step_out;
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < B; ++b) {
      for (int i = 0; i < d; ++i) features(i, b) = states[b].features[i];
      workload(b) = states[b].workload_fraction;
    }
    net.forward_step(params, features, workload, hidden, step_out);
    for (int b = 0; b < B; ++b) {
      const std::array<double, 2> logits = {step_out.logits(0, b), step_out.logits(1, b)};
      const auto [action, logp] = sample_action(logits, rngs[b]);
      const EnvState state = states[b];
      const StepOutcome outcome = envs[b].step(action);
      Trajectory& tr = out[b];
      record_step(tr, state, action, outcome);
      tr.log_prob_old.push_back(logp);
      tr.reward_value_old.push_back(step_out.reward_value(b) * value_scale);
      tr.cost_value_old.push_back(step_out.cost_value(b) * value_scale);
      if (outcome.next_state) states[b] = *outcome.next_state;
    }
  }
}

void adam_step(Eigen::VectorXd& values, const Eigen::VectorXd& grad, Eigen::VectorXd& m, Eigen::VectorXd& v,
               long step, double lr) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  values.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(clip_epsilon > 0.0 && clip_epsilon < 1.0, "clip_epsilon: must lie in (0, 1)");
  require(entropy_coef >= 0.0, "entropy_coef: must be >= 0");
  require(lagrangian_lr > 0.0, "lagrangian_lr: must be > 0");
  require(lagrangian_init >= 0.0, "lagrangian_init: must be >= 0");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda: must lie in [0, 1]");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma: must lie in [0, 1]");
  require(gamma_cost >= 0.0 && gamma_cost <= 1.0, "gamma_cost: must lie in [0, 1]");
  require(learning_rate > 0.0, "learning_rate: must be > 0");
  require(lr_warmup_fraction >= 0.0 && lr_warmup_fraction < 1.0, "lr_warmup_fraction: must lie in [0, 1)");
  require(update_epochs >= 1, "update_epochs: must be >= 1");
  require(value_weight >= 0.0, "value_weight: must be >= 0");
  require(max_grad_norm > 0.0, "max_grad_norm: must be > 0");
  require(episodes_per_iteration >= 1, "episodes_per_iteration: must be >= 1");
  require(minibatch_episodes >= 1, "minibatch_episodes: must be >= 1");
  require(iterations >= 0, "iterations: must be >= 0");
  require(value_scale >= 0.0, "value_scale: must be >= 0");
  require(workers >= 1, "workers: must be >= 1");
  budget.validate();
}

MultiplierConfig TrainConfig::multiplier_config() const {
  MultiplierConfig c;
  c.learning_rate = lagrangian_lr;
  c.mode = multiplier_mode;
  return c;
}

std::vector<Trajectory> collect(const PolicyNet& net, const PolicyParams& params, const EpisodeConfig& env,
                                int n_episodes, std::uint64_t first_episode, std::uint64_t policy_seed,
                                double value_scale, int workers) {
  if (n_episodes < 0) throw ConfigError("n_episodes must be >= 0");
  std::vector<Trajectory> out(static_cast<std::size_t>(n_episodes));
  if (n_episodes == 0) return out;
  env.validate();
  if (env.source->feature_dim() != net.config().feature_dim) {
    throw ConfigError(fmt::format("instance features have width {} but the network expects {}",
                                  env.source->feature_dim(), net.config().feature_dim));
  }

  const int groups = (n_episodes + kLockstepGroup - 1) / kLockstepGroup;
  auto run = [&](int g) {
    const int begin = g * kLockstepGroup;
    const int count = std::min(kLockstepGroup, n_episodes - begin);
    run_group(net, params, env, first_episode + static_cast<std::uint64_t>(begin), policy_seed, value_scale,
              std::span<Trajectory>(out.data() + begin, static_cast<std::size_t>(count)));
  };

  const int n_threads = std::min(std::max(workers, 1), groups);
  if (n_threads == 1) {
    for (int g = 0; g < groups; ++g) run(g);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int g = w; g < groups; g += n_threads) run(g);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<PreparedEpisode> prepare_batch(std::span<const Trajectory> trajectories, const TrainConfig& config) {
  std::vector<PreparedEpisode> prepared(trajectories.size());
  std::vector<double> all_r, all_c;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& tr = trajectories[i];
    auto r = compute_returns_and_advantages(std::span<const int>(tr.rewards), tr.reward_value_old, config.gamma,
                                            config.gae_lambda);
    auto c = compute_returns_and_advantages(std::span<const int>(tr.costs), tr.cost_value_old, config.gamma_cost,
                                            config.gae_lambda);
    all_r.insert(all_r.end(), r.advantages.begin(), r.advantages.end());
    all_c.insert(all_c.end(), c.advantages.begin(), c.advantages.end());
    prepared[i] = {&tr, std::move(r.advantages), std::move(c.advantages), std::move(r.returns), std::move(c.returns)};
  }
  normalize_advantages(all_r);
  normalize_advantages(all_c);
  std::size_t k = 0;
  for (auto& p : prepared) {
    for (std::size_t t = 0; t < p.adv_reward.size(); ++t, ++k) {
      p.adv_reward[t] = all_r[k];
      p.adv_cost[t] = all_c[k];
    }
  }
  return prepared;
}

void write_training_log_header(std::ostream& out) {
  out << "iteration,mean_reward,cost_fraction,coverage,lambda_u,lambda_l,policy_loss,value_loss_reward,"
         "value_loss_cost,entropy,learning_rate\n";
}

void write_training_log_row(std::ostream& out, const IterationLog& r) {
  out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.8g},{:.8g},{:.8g},{:.8g},{:.8g},{:.8g},{:.8g}\n", r.iteration,
                     r.mean_reward, r.cost_fraction, r.coverage, r.lambda_u, r.lambda_l, r.policy_loss,
                     r.value_loss_reward, r.value_loss_cost, r.entropy, r.learning_rate);
}

std::vector<std::vector<int>> episode_minibatches(int episodes, int minibatch, std::uint64_t seed, int iteration,
                                                  int epoch) {
  if (minibatch < 1) throw ConfigError("minibatch: must be >= 1");
  std::vector<int> order(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int i = 0; i < episodes; ++i) order[i] = i;
  Rng rng = make_rng(seed, {stream::kShuffle, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(epoch)});
  for (int i = episodes - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform01(rng) * (i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < episodes; start += minibatch) {
    batches.emplace_back(order.begin() + start, order.begin() + std::min(episodes, start + minibatch));
  }
  return batches;
}

double scheduled_learning_rate(const TrainConfig& config, long update_step, long total_updates) {
  if (total_updates <= 0) return config.learning_rate;
  const long warmup =
      std::max(1L, static_cast<long>(std::ceil(config.lr_warmup_fraction * static_cast<double>(total_updates))));
  if (update_step < warmup) {
    return config.learning_rate * static_cast<double>(update_step + 1) / static_cast<double>(warmup);
  }
  const long span = std::max(1L, total_updates - warmup);
  const double progress = std::min(1.0, static_cast<double>(update_step - warmup) / static_cast<double>(span));
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double clip_gradient_norm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
  return norm;
}

TrainResult train(const TrainConfig& config, const EpisodeConfig& env, const PolicyNet& net, PolicyParams initial,
                  const IterationCallback& on_iteration) {
  config.validate();
  env.validate();
  if (!(initial.config == net.config())) throw ConfigError("initial parameters do not match the network shape");

  TrainResult result;
  result.params = std::move(initial);
  result.multipliers.lambda_u = config.lagrangian_init;
  result.multipliers.lambda_l = config.lagrangian_init;
  if (config.iterations == 0) return result;

  const double value_scale = config.value_scale > 0.0 ? config.value_scale : static_cast<double>(env.length);
  const int E = config.episodes_per_iteration;
  const int mb = std::min(config.minibatch_episodes, E);
  const int minibatches = (E + mb - 1) / mb;
  const long total_updates = static_cast<long>(config.iterations) * config.update_epochs * minibatches;
  const MultiplierConfig mult_config = config.multiplier_config();

  PolicyParams& params = result.params;
  const Eigen::Index n_params = params.values.size();
  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd grad(n_params);
  long update_step = 0;

  for (int it = 0; it < config.iterations; ++it) {
    const auto trajs = collect(net, params, env, E, static_cast<std::uint64_t>(it) * E, config.seed, value_scale,
                               config.workers);
    long reward_sum = 0, cost_sum = 0, steps = 0;
    for (const auto& tr : trajs) {
      reward_sum += tr.total_reward();
      cost_sum += tr.total_cost();
      steps += tr.length();
    }
    const double cost_fraction = static_cast<double>(cost_sum) / static_cast<double>(steps);
    if (!config.freeze_multipliers) {
      result.multipliers = update_multipliers(result.multipliers, cost_fraction, config.budget, mult_config);
    }

    const auto prepared = prepare_batch(trajs, config);

    IterationLog row;
    row.iteration = it;
    row.mean_reward = static_cast<double>(reward_sum) / static_cast<double>(steps);
    row.cost_fraction = cost_fraction;
    row.coverage = 1.0 - cost_fraction;
    row.lambda_u = result.multipliers.lambda_u;
    row.lambda_l = result.multipliers.lambda_l;
    int n_updates = 0;

    for (int epoch = 0; epoch < config.update_epochs; ++epoch) {
      for (const auto& indices : episode_minibatches(E, mb, config.seed, it, epoch)) {
        std::vector<const PreparedEpisode*> batch;
        for (int i : indices) batch.push_back(&prepared[i]);

        grad.setZero();
        LossReport loss;
        try {
          loss = ppo_losses(net, params, batch, result.multipliers, config, value_scale, &grad);
        } catch (const NumericError& e) {
          throw TrainingAborted(fmt::format("iteration {}: {}", it, e.what()), params);
        }
        clip_gradient_norm(grad, config.max_grad_norm);
        const double lr = scheduled_learning_rate(config, update_step, total_updates);
        ++update_step;

        Eigen::VectorXd previous = params.values;
        adam_step(params.values, grad, adam_m, adam_v, update_step, lr);
        if (!params.values.allFinite()) {
          params.values = std::move(previous);
          throw TrainingAborted(fmt::format("iteration {}: parameters became non-finite", it), params);
        }

        row.policy_loss += loss.policy_loss;
        row.value_loss_reward += loss.value_loss_reward;
        row.value_loss_cost += loss.value_loss_cost;
        row.entropy += loss.entropy;
        row.learning_rate = lr;
        ++n_updates;
      }
    }
    row.policy_loss /= n_updates;
    row.value_loss_reward /= n_updates;
    row.value_loss_cost /= n_updates;
    row.entropy /= n_updates;
    result.log.push_back(row);
    if (on_iteration) on_iteration(row, params, result.multipliers);
  }
  return result;
}

}  // namespace falcon
