#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "falcon/fatigue.hpp"

namespace falcon {

enum class Action : std::uint8_t { AI = 0, Human = 1 };

inline constexpr int kActionCount = 2;

/// Per-step record of one episode. Observations are stored flat, row t holding
/// the features of instance t; `workload_fraction[t]` is the observed rho_t / L.
struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t episode_index = 0;
  FatigueParams fatigue;
  int feature_dim = 0;

  std::vector<double> features;
  std::vector<double> workload_fraction;
  std::vector<Action> actions;
  std::vector<int> rewards;
  std::vector<int> costs;
  std::vector<int> workloads;  // after the step
  std::vector<double> etas;    // human noise rate at the post-step workload

  std::vector<double> log_prob_old;
  std::vector<double> reward_value_old;
  std::vector<double> cost_value_old;

  int length() const noexcept { return static_cast<int>(actions.size()); }
  std::span<const double> observation(int t) const {
    return {features.data() + static_cast<std::size_t>(t) * feature_dim, static_cast<std::size_t>(feature_dim)};
  }
  int total_reward() const;
  int total_cost() const;
};

/// 1 - (sum of costs) / T.
double coverage(std::span<const int> costs);
double coverage(const Trajectory& trajectory);

}  // namespace falcon
