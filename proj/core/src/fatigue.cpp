#include "falcon/fatigue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "falcon/errors.hpp"

namespace falcon {

namespace {

constexpr int kMaxSampleAttempts = 100000;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid fatigue parameters: " + what);
}

bool valid_unit(const Interval& i) { return 0.0 <= i.lo && i.lo <= i.hi && i.hi <= 1.0; }

}  // namespace

bool FatigueParams::is_valid() const noexcept {
  return 0.0 <= w_base && w_base <= w0 && w0 <= w_peak && w_peak <= 1.0 && 0.0 < rho_hat &&
         rho_hat < rho_bar && rho_bar < 1.0 && k > 0.0 && std::isfinite(k) && horizon_l >= 1;
}

void FatigueParams::validate() const {
  require(0.0 <= w_base && w_base <= w0 && w0 <= w_peak && w_peak <= 1.0,
          "need 0 <= w_base <= w0 <= w_peak <= 1");
  require(0.0 < rho_hat && rho_hat < rho_bar && rho_bar < 1.0, "need 0 < rho_hat < rho_bar < 1");
  require(k > 0.0 && std::isfinite(k), "need k > 0");
  require(horizon_l >= 1, "need horizon_l >= 1");
}

double warmup_branch(const FatigueParams& p, double rho) {
  const double x = rho / (p.rho_hat * p.horizon_l);
  return p.w0 + (p.w_peak - p.w0) * x * x;
}

double decay_branch(const FatigueParams& p, double rho) {
  return p.w_base + (p.w_peak - p.w_base) / (1.0 + std::exp(p.k * (rho - p.rho_bar * p.horizon_l)));
}

double performance(const FatigueParams& p, double rho) {
  const double w = rho <= p.rho_hat * p.horizon_l ? warmup_branch(p, rho) : decay_branch(p, rho);
  return std::clamp(w, 0.0, 1.0);
}

double boundary_jump(const FatigueParams& p) {
  return std::abs(p.w_peak - decay_branch(p, p.rho_hat * p.horizon_l));
}

double boundary_jump_bound(const FatigueParams& p) {
  const double e = std::exp(p.k * (p.rho_hat - p.rho_bar) * p.horizon_l);
  return (p.w_peak - p.w_base) * e / (1.0 + e);
}

void FatigueParamRanges::validate() const {
  auto req = [this](bool ok, const char* what) {
    if (!ok) throw ConfigError("invalid fatigue ranges '" + name + "': " + what);
  };
  req(valid_unit(w0) && valid_unit(w_peak) && valid_unit(w_base),
      "performance intervals must satisfy 0 <= lo <= hi <= 1");
  req(rho_hat.lo > 0.0 && rho_hat.lo <= rho_hat.hi && rho_hat.hi < 1.0, "rho_hat must lie in (0,1)");
  req(rho_bar.lo > 0.0 && rho_bar.lo <= rho_bar.hi && rho_bar.hi < 1.0, "rho_bar must lie in (0,1)");
  req(k.lo > 0.0 && k.lo <= k.hi && std::isfinite(k.hi), "k must be positive");
  req(horizon_l >= 1, "horizon_l must be >= 1");
  // The most permissive corner must be valid, otherwise sampling can never succeed.
  req(w_base.lo <= w0.hi && w0.lo <= w_peak.hi && std::max(w_base.lo, w0.lo) <= w_peak.hi,
      "performance intervals admit no ordered tuple");
  req(rho_hat.lo < rho_bar.hi, "rho_hat interval lies entirely above rho_bar");
}

bool FatigueParamRanges::ordering_consistent() const noexcept {
  return w_base.hi <= w0.lo && w0.hi <= w_peak.lo && rho_hat.hi < rho_bar.lo;
}

FatigueParamRanges FatigueParamRanges::point(std::string name, const FatigueParams& p) {
  FatigueParamRanges r;
  r.name = std::move(name);
  r.w0 = {p.w0, p.w0};
  r.w_peak = {p.w_peak, p.w_peak};
  r.w_base = {p.w_base, p.w_base};
  r.rho_hat = {p.rho_hat, p.rho_hat};
  r.rho_bar = {p.rho_bar, p.rho_bar};
  r.k = {p.k, p.k};
  r.horizon_l = p.horizon_l;
  return r;
}

FatigueParams sample_params(const FatigueParamRanges& r, Rng& rng) {
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    FatigueParams p;
    p.w0 = uniform(rng, r.w0.lo, r.w0.hi);
    p.w_base = uniform(rng, r.w_base.lo, r.w_base.hi);
    p.w_peak = uniform(rng, r.w_peak.lo, r.w_peak.hi);
    p.rho_hat = uniform(rng, r.rho_hat.lo, r.rho_hat.hi);
    p.rho_bar = uniform(rng, r.rho_bar.lo, r.rho_bar.hi);
    p.k = uniform(rng, r.k.lo, r.k.hi);
    p.horizon_l = r.horizon_l;
    if (p.is_valid()) return p;
  }
  throw ConfigError("fatigue ranges '" + r.name + "' rejected every sampled tuple");
}

}  // namespace falcon
