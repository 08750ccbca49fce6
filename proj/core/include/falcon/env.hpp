#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "falcon/actors.hpp"
#include "falcon/fatigue.hpp"
#include "falcon/trajectory.hpp"

namespace falcon {

/// What the deferral policy observes at step t: (x_t, rho_t). The fatigue
/// parameters and current noise rate are never exposed.
struct EnvState {
  std::span<const double> features;
  int workload = 0;
  int step = 1;  // 1-based
  double workload_fraction = 0.0;
};

struct StepOutcome {
  int reward = 0;
  int cost = 0;
  int final_prediction = 0;
  Action acting_agent = Action::AI;
  double eta = 0.0;
  std::optional<EnvState> next_state;  // empty once the episode is over

  bool terminal() const noexcept { return !next_state.has_value(); }
};

using FatigueSource = std::variant<FatigueParams, FatigueParamRanges>;

struct EpisodeConfig {
  int length = 100;
  FatigueSource fatigue = FatigueParams{};
  SharedStream source;
  std::uint64_t seed = 0;

  /// ConfigError for T < 1, a missing source, or a source smaller than T.
  void validate() const;
};

/// Episodic CMDP over a shared instance pool. Each episode draws T distinct
/// instances, samples fresh fatigue parameters when given ranges, and starts
/// with zero workload. All randomness is derived from (seed, episode index),
/// and the human's noise draws are fixed per step, so two policies evaluated on
/// the same episode face the same instances and the same human coin flips.
class DeferralEnv {
 public:
  explicit DeferralEnv(EpisodeConfig config);

  EnvState reset(std::uint64_t episode_index);

  /// Human: workload += 1, then the expert answers at the new workload.
  /// AI: workload unchanged, stored AI prediction. LifecycleError when the
  /// episode is over or reset() has not been called.
  StepOutcome step(Action action);

  bool terminal() const noexcept { return step_ >= config_.length; }
  bool started() const noexcept { return started_; }
  EnvState state() const;
  const TaskInstance& current_instance() const;
  const FatigueParams& fatigue() const noexcept { return fatigue_; }
  int workload() const noexcept { return workload_; }
  int length() const noexcept { return config_.length; }
  int feature_dim() const noexcept { return config_.source->feature_dim(); }
  int class_count() const noexcept { return config_.source->class_count(); }
  std::uint64_t episode_index() const noexcept { return episode_; }
  const EpisodeConfig& config() const noexcept { return config_; }

 private:
  EpisodeConfig config_;
  FatigueParams fatigue_;
  std::vector<std::size_t> order_;
  std::vector<double> human_draws_;
  std::vector<std::size_t> scratch_;
  std::uint64_t episode_ = 0;
  int step_ = 0;  // 0-based index of the current instance
  int workload_ = 0;
  bool started_ = false;
};

/// Fills the bookkeeping fields of `traj` for a step taken from `state`.
void record_step(Trajectory& traj, const EnvState& state, Action action, const StepOutcome& out);

/// Audit log: `episode,t,action,reward,cost,workload,eta` with a header row.
void write_trajectory_log_header(std::ostream& out);
void write_trajectory_log(std::ostream& out, const Trajectory& traj);

}  // namespace falcon
