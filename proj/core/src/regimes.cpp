#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "falcon/errors.hpp"
#include "falcon/eval.hpp"
#include "falcon/presets.hpp"

namespace falcon {

namespace {

constexpr std::array<const char*, 4> kRegimeNames = {"sustained_high", "normal_fatigue", "rapid_fatigue",
                                                     "real_human_recall"};

// Every tuple the preset can produce, for fixed presets just the one.
template <typename F>
void for_each_corner(const FatigueSource& source, F&& f) {
  if (const auto* fixed = std::get_if<FatigueParams>(&source)) {
    f(*fixed);
    return;
  }
  const auto& r = std::get<FatigueParamRanges>(source);
  for (int mask = 0; mask < 64; ++mask) {
    auto pick = [&](int bit, const Interval& iv) { return (mask >> bit) & 1 ? iv.hi : iv.lo; };
    FatigueParams p;
    p.w0 = pick(0, r.w0);
    p.w_peak = pick(1, r.w_peak);
    p.w_base = pick(2, r.w_base);
    p.rho_hat = pick(3, r.rho_hat);
    p.rho_bar = pick(4, r.rho_bar);
    p.k = pick(5, r.k);
    p.horizon_l = r.horizon_l;
    if (p.is_valid()) f(p);
  }
}

}  // namespace

void RegimePreset::check() const {
  auto fail = [this](const std::string& why) { throw NumericError(fmt::format("regime {}: {}", name, why)); };
  for_each_corner(fatigue, [&](const FatigueParams& p) {
    if (name == "sustained_high") {
      for (int rho = 0; rho <= horizon_l; ++rho) {
        if (performance(p, rho) < 0.8) fail(fmt::format("performance {} < 0.8 at rho={}", performance(p, rho), rho));
      }
    } else if (name == "rapid_fatigue") {
      const double half = performance(p, 0.5 * horizon_l);
      if (half - p.w_base > 0.05) fail(fmt::format("still {} above w_base at rho=L/2", half - p.w_base));
    } else if (name == "real_human_recall") {
      if (std::abs(performance(p, 0) - 0.78) > 1e-12) fail("performance at rho=0 is not 0.78");
      if (std::abs(performance(p, horizon_l) - 0.66) > 0.01) fail("performance at rho=L is not within 0.01 of 0.66");
    }
  });
}

const std::vector<RegimePreset>& regime_presets() {
  static const std::vector<RegimePreset> presets = [] {
    std::vector<RegimePreset> out;
    for (const char* n : kRegimeNames) {
      const auto& r = preset(n);
      RegimePreset p{n, FatigueSource{r}, r.horizon_l};
      p.check();
      out.push_back(std::move(p));
    }
    return out;
  }();
  return presets;
}

const RegimePreset& regime(std::string_view name) {
  const auto& all = regime_presets();
  auto it = std::find_if(all.begin(), all.end(), [&](const auto& p) { return p.name == name; });
  if (it == all.end()) {
    throw ConfigError(fmt::format("unknown regime '{}' (valid: {})", name, fmt::join(kRegimeNames, ", ")));
  }
  return *it;
}

std::vector<std::string> regime_names() { return {kRegimeNames.begin(), kRegimeNames.end()}; }

}  // namespace falcon
