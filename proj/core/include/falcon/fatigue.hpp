#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "falcon/random.hpp"

namespace falcon {

/// Parameters of the two-phase workload/performance curve: a quadratic warm-up
/// from `w0` to `w_peak` over the first `rho_hat * horizon_l` deferrals, then a
/// sigmoid decay toward `w_base` centred at `rho_bar * horizon_l`.
struct FatigueParams {
  double w0 = 0.9;
  double w_peak = 1.0;
  double w_base = 0.7;
  double rho_hat = 0.05;
  double rho_bar = 0.375;
  double k = 0.1;
  int horizon_l = 200;

  /// Throws ConfigError unless 0 <= w_base <= w0 <= w_peak <= 1,
  /// 0 < rho_hat < rho_bar < 1, k > 0 and horizon_l >= 1.
  void validate() const;
  bool is_valid() const noexcept;

  bool operator==(const FatigueParams&) const = default;
};

/// Human correctness probability after `rho` deferrals, clamped to [0, 1].
/// At rho == rho_hat * L the warm-up branch is used, so the peak is hit exactly.
double performance(const FatigueParams& params, double rho);

double warmup_branch(const FatigueParams& params, double rho);
double decay_branch(const FatigueParams& params, double rho);

/// |w_peak - decay_branch(rho_hat * L)|: the discontinuity between the phases.
double boundary_jump(const FatigueParams& params);

/// Closed form of the same quantity, (w_peak - w_base) * e / (1 + e) with
/// e = exp(k * (rho_hat - rho_bar) * L).
double boundary_jump_bound(const FatigueParams& params);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  bool operator==(const Interval&) const = default;
};

/// Uniform sampling box for FatigueParams, one per benchmark or regime preset.
struct FatigueParamRanges {
  std::string name;
  Interval w0;
  Interval w_peak;
  Interval w_base;
  Interval rho_hat;
  Interval rho_bar;
  Interval k;
  int horizon_l = 100;

  /// lo <= hi everywhere, all bounds inside their parameter domains, and at
  /// least one corner of the box is a valid FatigueParams.
  void validate() const;

  /// True when every tuple in the box is valid (no rejection ever needed).
  bool ordering_consistent() const noexcept;

  /// Degenerate box containing exactly `p`.
  static FatigueParamRanges point(std::string name, const FatigueParams& p);

  bool operator==(const FatigueParamRanges&) const = default;
};

/// Draws each field uniformly and independently from its interval. Boxes whose
/// intervals overlap across the ordering constraints (the published Cifar100
/// and Flickr tables do) are handled by redrawing the whole tuple until it is
/// valid. Deterministic in the state of `rng`.
FatigueParams sample_params(const FatigueParamRanges& ranges, Rng& rng);

}  // namespace falcon
