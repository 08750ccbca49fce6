#include "falcon/env.hpp"

#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "falcon/errors.hpp"

namespace falcon {

int Trajectory::total_reward() const { return std::accumulate(rewards.begin(), rewards.end(), 0); }
int Trajectory::total_cost() const { return std::accumulate(costs.begin(), costs.end(), 0); }

double coverage(std::span<const int> costs) {
  if (costs.empty()) return 1.0;
  const int total = std::accumulate(costs.begin(), costs.end(), 0);
  return 1.0 - static_cast<double>(total) / static_cast<double>(costs.size());
}

double coverage(const Trajectory& trajectory) { return coverage(trajectory.costs); }

void EpisodeConfig::validate() const {
  if (length < 1) throw ConfigError("episode length must be >= 1");
  if (!source) throw ConfigError("episode config has no instance source");
  if (source->size() < static_cast<std::size_t>(length)) {
    throw ConfigError("instance source exhausted: " + std::to_string(source->size()) +
                      " instances for episodes of length " + std::to_string(length));
  }
  std::visit([](const auto& f) { f.validate(); }, fatigue);
}

DeferralEnv::DeferralEnv(EpisodeConfig config) : config_(std::move(config)) {
  config_.validate();
  order_.resize(config_.length);
  human_draws_.resize(2 * static_cast<std::size_t>(config_.length));
  scratch_.resize(config_.source->size());
}

EnvState DeferralEnv::reset(std::uint64_t episode_index) {
  episode_ = episode_index;
  step_ = 0;
  workload_ = 0;
  started_ = true;

  if (const auto* fixed = std::get_if<FatigueParams>(&config_.fatigue)) {
    fatigue_ = *fixed;
  } else {
    auto rng = make_rng(config_.seed, {stream::kFatigue, episode_index});
    fatigue_ = sample_params(std::get<FatigueParamRanges>(config_.fatigue), rng);
  }

  // T distinct instances via a partial Fisher-Yates shuffle.
  auto rng = make_rng(config_.seed, {stream::kInstances, episode_index});
  std::iota(scratch_.begin(), scratch_.end(), std::size_t{0});
  for (int t = 0; t < config_.length; ++t) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(t), scratch_.size() - 1);
    std::swap(scratch_[t], scratch_[pick(rng)]);
    order_[t] = scratch_[t];
  }

  auto human = make_rng(config_.seed, {stream::kHuman, episode_index});
  for (auto& u : human_draws_) u = uniform01(human);
  return state();
}

EnvState DeferralEnv::state() const {
  if (!started_) throw LifecycleError("environment not reset");
  if (terminal()) throw LifecycleError("episode is over");
  EnvState s;
  s.features = current_instance().features;
  s.workload = workload_;
  s.step = step_ + 1;
  s.workload_fraction = static_cast<double>(workload_) / fatigue_.horizon_l;
  return s;
}

const TaskInstance& DeferralEnv::current_instance() const {
  return (*config_.source)[order_[static_cast<std::size_t>(step_)]];
}

StepOutcome DeferralEnv::step(Action action) {
  if (!started_) throw LifecycleError("step() before reset()");
  if (terminal()) throw LifecycleError("step() after the episode ended");

  const auto& inst = current_instance();
  StepOutcome out;
  out.acting_agent = action;
  if (action == Action::Human) {
    ++workload_;
    out.cost = 1;
    const double eta = 1.0 - performance(fatigue_, workload_);
    out.eta = eta;
    out.final_prediction = noisy_label(inst.label, config_.source->class_count(), eta,
                                       human_draws_[2 * step_], human_draws_[2 * step_ + 1]);
  } else {
    out.eta = 1.0 - performance(fatigue_, workload_);
    out.final_prediction = ai_predict(inst);
  }
  out.reward = out.final_prediction == inst.label ? 1 : 0;
  ++step_;
  if (!terminal()) out.next_state = state();
  return out;
}

void record_step(Trajectory& traj, const EnvState& state, Action action, const StepOutcome& out) {
  traj.feature_dim = static_cast<int>(state.features.size());
  traj.features.insert(traj.features.end(), state.features.begin(), state.features.end());
  traj.workload_fraction.push_back(state.workload_fraction);
  traj.actions.push_back(action);
  traj.rewards.push_back(out.reward);
  traj.costs.push_back(out.cost);
  traj.workloads.push_back(state.workload + out.cost);
  traj.etas.push_back(out.eta);
}

void write_trajectory_log_header(std::ostream& out) { out << "episode,t,action,reward,cost,workload,eta\n"; }

void write_trajectory_log(std::ostream& out, const Trajectory& traj) {
  for (int t = 0; t < traj.length(); ++t) {
    out << fmt::format("{},{},{},{},{},{},{:.6f}\n", traj.episode_index, t + 1,
                       traj.actions[t] == Action::Human ? "human" : "ai", traj.rewards[t], traj.costs[t],
                       traj.workloads[t], traj.etas[t]);
  }
}

}  // namespace falcon
