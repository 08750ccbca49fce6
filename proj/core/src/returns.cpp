#include "falcon/returns.hpp"

#include <cmath>
#include <numeric>

#include "falcon/errors.hpp"

namespace falcon {

ReturnsAdvantages compute_returns_and_advantages(std::span<const double> signal, std::span<const double> values,
                                                 double gamma, double gae_lambda) {
  if (signal.size() != values.size()) throw ConfigError("signal and value sequences differ in length");
  const std::size_t n = signal.size();
  ReturnsAdvantages out{std::vector<double>(n), std::vector<double>(n)};
  double ret = 0.0;
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = i + 1 < n ? values[i + 1] : 0.0;
    const double delta = signal[i] + gamma * next_value - values[i];
    gae = delta + gamma * gae_lambda * gae;
    ret = signal[i] + gamma * ret;
    out.advantages[i] = gae;
    out.returns[i] = ret;
  }
  return out;
}

ReturnsAdvantages compute_returns_and_advantages(std::span<const int> signal, std::span<const double> values,
                                                 double gamma, double gae_lambda) {
  std::vector<double> s(signal.begin(), signal.end());
  return compute_returns_and_advantages(std::span<const double>(s), values, gamma, gae_lambda);
}

void normalize_advantages(std::span<double> values) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  for (double& v : values) v = sd > 1e-12 ? (v - mean) / sd : v - mean;
}

}  // namespace falcon
