#include "falcon/multipliers.hpp"

#include <algorithm>
#include <cmath>

#include "falcon/errors.hpp"

namespace falcon {

void Budget::validate() const {
  if (!(0.0 <= lower && lower <= upper && upper <= 1.0)) throw ConfigError("budget must satisfy 0 <= d_l <= d_u <= 1");
}

Budget Budget::for_coverage(double target_coverage, double width) {
  const double centre = 1.0 - target_coverage;
  return {std::clamp(centre - 0.5 * width, 0.0, 1.0), std::clamp(centre + 0.5 * width, 0.0, 1.0)};
}

namespace {

double ascent_step(double lambda, AdamMoments& mom, double g, long step, const MultiplierConfig& c) {
  if (c.mode == MultiplierMode::PlainGradient) return std::max(0.0, lambda + c.learning_rate * g);
  mom.m = c.beta1 * mom.m + (1.0 - c.beta1) * g;
  mom.v = c.beta2 * mom.v + (1.0 - c.beta2) * g * g;
  const double m_hat = mom.m / (1.0 - std::pow(c.beta1, static_cast<double>(step)));
  const double v_hat = mom.v / (1.0 - std::pow(c.beta2, static_cast<double>(step)));
  return std::max(0.0, lambda + c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon));
}

}  // namespace

Multipliers update_multipliers(const Multipliers& current, double cost_fraction, const Budget& budget,
                               const MultiplierConfig& config) {
  budget.validate();
  Multipliers next = current;
  next.step = current.step + 1;
  next.lambda_u = ascent_step(current.lambda_u, next.moments_u, cost_fraction - budget.upper, next.step, config);
  next.lambda_l = ascent_step(current.lambda_l, next.moments_l, budget.lower - cost_fraction, next.step, config);
  return next;
}

}  // namespace falcon
