#pragma once

namespace falcon {

/// Per-episode deferral-fraction band [d_l, d_u]; coverage = 1 - cost fraction.
struct Budget {
  double lower = 0.55;
  double upper = 0.65;

  void validate() const;
  /// Band of width `width` centred on a cost fraction of 1 - coverage, clamped to [0,1].
  static Budget for_coverage(double target_coverage, double width = 0.1);
};

struct AdamMoments {
  double m = 0.0;
  double v = 0.0;
};

enum class MultiplierMode { Adam, PlainGradient };

struct Multipliers {
  double lambda_u = 0.001;
  double lambda_l = 0.001;
  AdamMoments moments_u;
  AdamMoments moments_l;
  long step = 0;
};

struct MultiplierConfig {
  double learning_rate = 0.035;
  MultiplierMode mode = MultiplierMode::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One projected ascent step: lambda_u along (Jc - d_u), lambda_l along
/// (d_l - Jc), each clamped at zero afterwards. `cost_fraction` is the
/// undiscounted mean per-episode deferral fraction of the last collection.
Multipliers update_multipliers(const Multipliers& current, double cost_fraction, const Budget& budget,
                               const MultiplierConfig& config);

}  // namespace falcon
