#include "falcon/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "falcon/errors.hpp"

namespace falcon {

Action policy_random(double target_coverage, Rng& rng) {
  return uniform01(rng) < 1.0 - target_coverage ? Action::Human : Action::AI;
}

Action threshold_policy(const TaskInstance& instance, double tau) {
  if (!instance.ai_confidence) {
    throw ConfigError("threshold policy needs ai_confidence (instance " + instance.instance_id + ")");
  }
  return *instance.ai_confidence < tau ? Action::Human : Action::AI;
}

RandomDeferrer::RandomDeferrer(double target_coverage, std::uint64_t seed)
    : target_coverage_(target_coverage), seed_(seed), rng_(make_rng(seed, {stream::kBaseline})) {
  if (!(target_coverage >= 0.0 && target_coverage <= 1.0)) {
    throw ConfigError("random deferral target coverage must lie in [0, 1]");
  }
}

void RandomDeferrer::begin_episode(std::uint64_t episode_index) {
  rng_ = make_rng(seed_, {stream::kBaseline, episode_index});
}

double threshold_for_coverage(std::span<const TaskInstance> instances, double target_coverage) {
  if (instances.empty()) throw ConfigError("no instances to calibrate a threshold on");
  std::vector<double> conf;
  conf.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.ai_confidence) throw ConfigError("threshold policy needs ai_confidence");
    conf.push_back(*inst.ai_confidence);
  }
  std::sort(conf.begin(), conf.end());
  const auto n = conf.size();
  const auto k = static_cast<std::size_t>(std::lround((1.0 - target_coverage) * static_cast<double>(n)));
  if (k == 0) return 0.0;
  if (k >= n) return std::nextafter(conf.back(), INFINITY);
  return 0.5 * (conf[k - 1] + conf[k]);
}

Action StaticGateDeferrer::act(const EnvState&, const TaskInstance& instance) {
  return gate_->defer_probability(instance.features) >= threshold_ ? Action::Human : Action::AI;
}

double gate_threshold_for_coverage(const StaticGate& gate, std::span<const TaskInstance> instances,
                                   double target_coverage) {
  if (instances.empty()) throw ConfigError("no instances to calibrate a gate threshold on");
  std::vector<double> g;
  g.reserve(instances.size());
  for (const auto& inst : instances) g.push_back(gate.defer_probability(inst.features));
  std::sort(g.begin(), g.end(), std::greater<>());
  const auto n = g.size();
  const auto k = static_cast<std::size_t>(std::lround((1.0 - target_coverage) * static_cast<double>(n)));
  if (k == 0) return 2.0;
  if (k >= n) return 0.0;
  return 0.5 * (g[k - 1] + g[k]);
}

}  // namespace falcon
