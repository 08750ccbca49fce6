#pragma once

#include <span>
#include <vector>

namespace falcon {

struct ReturnsAdvantages {
  std::vector<double> returns;
  std::vector<double> advantages;
};

/// Discounted returns sum_j gamma^j s_{t+j} of one complete episode, and
/// generalized advantage estimates A_t = sum_l (gamma*lambda)^l delta_{t+l}
/// with delta_t = s_t + gamma * V_{t+1} - V_t and V_T = 0 (terminal).
ReturnsAdvantages compute_returns_and_advantages(std::span<const double> signal, std::span<const double> values,
                                                 double gamma, double gae_lambda);

ReturnsAdvantages compute_returns_and_advantages(std::span<const int> signal, std::span<const double> values,
                                                 double gamma, double gae_lambda);

/// Shifts and scales to zero mean and unit (population) variance. A constant
/// input is only centred.
void normalize_advantages(std::span<double> values);

}  // namespace falcon
