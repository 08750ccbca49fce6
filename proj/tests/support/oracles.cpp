#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

namespace falcon::testing {

GaeOracle brute_force_gae(std::span<const double> signal, std::span<const double> values, double gamma,
                          double gae_lambda) {
  const std::size_t n = signal.size();
  auto value_at = [&](std::size_t t) { return t < n ? values[t] : 0.0; };
  GaeOracle out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = t; j < n; ++j) {
      out.returns[t] += std::pow(gamma, static_cast<double>(j - t)) * signal[j];
      const double delta = signal[j] + gamma * value_at(j + 1) - values[j];
      out.advantages[t] += std::pow(gamma * gae_lambda, static_cast<double>(j - t)) * delta;
    }
  }
  return out;
}

double chi_square_statistic(std::span<const long> observed, double expected_per_cell) {
  double stat = 0.0;
  for (long o : observed) {
    const double d = static_cast<double>(o) - expected_per_cell;
    stat += d * d / expected_per_cell;
  }
  return stat;
}

double chi_square_critical(int df, double alpha) {
  boost::math::chi_squared dist(df);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

GradientCheck check_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& analytic, double step, double rel_tol, double abs_floor) {
  GradientCheck result;
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    const double numeric = (up - down) / (2.0 * step);
    const double diff = std::abs(analytic[i] - numeric);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    if (diff > std::max(rel_tol * scale, abs_floor)) {
      ++result.failures;
      if (rel > result.worst_relative) {
        result.worst_relative = rel;
        result.worst_index = static_cast<std::size_t>(i);
      }
    }
  }
  return result;
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
  return area;
}

}  // namespace falcon::testing
