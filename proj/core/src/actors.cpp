#include "falcon/actors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "falcon/errors.hpp"

namespace falcon {

InstanceStream::InstanceStream(std::vector<TaskInstance> instances, int class_count)
    : instances_(std::move(instances)), class_count_(class_count) {
  if (class_count_ < 2) throw SchemaError("class count must be >= 2");
  if (!instances_.empty()) feature_dim_ = static_cast<int>(instances_.front().features.size());
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& inst = instances_[i];
    const auto where = " at instance " + std::to_string(i) + " ('" + inst.instance_id + "')";
    if (inst.label < 0 || inst.label >= class_count_) {
      throw SchemaError("label " + std::to_string(inst.label) + " outside [0, " +
                        std::to_string(class_count_) + ")" + where);
    }
    if (inst.ai_prediction && (*inst.ai_prediction < 0 || *inst.ai_prediction >= class_count_)) {
      throw SchemaError("ai_prediction " + std::to_string(*inst.ai_prediction) + " outside [0, " +
                        std::to_string(class_count_) + ")" + where);
    }
    if (inst.ai_confidence && !(*inst.ai_confidence >= 0.0 && *inst.ai_confidence <= 1.0)) {
      throw SchemaError("ai_confidence outside [0, 1]" + where);
    }
    if (static_cast<int>(inst.features.size()) != feature_dim_) {
      throw SchemaError("feature width " + std::to_string(inst.features.size()) + " != " +
                        std::to_string(feature_dim_) + where);
    }
  }
}

bool InstanceStream::has_confidence() const noexcept {
  return !instances_.empty() &&
         std::all_of(instances_.begin(), instances_.end(),
                     [](const TaskInstance& i) { return i.ai_confidence.has_value(); });
}

int ai_predict(const TaskInstance& instance) {
  if (!instance.ai_prediction) {
    throw DataError("instance '" + instance.instance_id + "' has no ai_prediction");
  }
  return *instance.ai_prediction;
}

int noisy_label(int label, int class_count, double eta, double u_correct, double u_class) {
  if (u_correct >= eta) return label;
  // Uniform over the K - 1 classes other than `label`.
  int wrong = std::min(static_cast<int>(u_class * (class_count - 1)), class_count - 2);
  return wrong >= label ? wrong + 1 : wrong;
}

HumanExpert::HumanExpert(FatigueParams params, int class_count, Rng rng)
    : params_(params), class_count_(class_count), rng_(std::move(rng)) {
  params_.validate();
  if (class_count_ < 2) throw ConfigError("human expert needs at least two classes");
}

int HumanExpert::predict(const TaskInstance& instance, double rho) {
  const double u_correct = uniform01(rng_);
  const double u_class = uniform01(rng_);
  return noisy_label(instance.label, class_count_, noise_rate(rho), u_correct, u_class);
}

void SyntheticTaskSpec::validate() const {
  if (class_count < 2) throw ConfigError("synthetic.class_count must be >= 2");
  if (feature_dim < 1) throw ConfigError("synthetic.feature_dim must be >= 1");
  if (!(ai_accuracy >= 0.0 && ai_accuracy <= 1.0)) throw ConfigError("synthetic.ai_accuracy must be in [0,1]");
  if (!(difficulty_coupling >= 0.0 && difficulty_coupling <= 1.0)) {
    throw ConfigError("synthetic.difficulty_coupling must be in [0,1]");
  }
  if (!(snr >= 0.0) || !(noise_std >= 0.0)) throw ConfigError("synthetic.snr and noise_std must be >= 0");
}

std::vector<TaskInstance> generate_synthetic_stream(const SyntheticTaskSpec& spec, Rng& rng) {
  spec.validate();
  const int K = spec.class_count;
  const int d = spec.feature_dim;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_class(0, K - 1);

  // Class centroids: |z| / ||z||, all components positive.
  std::vector<std::vector<double>> centroids(K, std::vector<double>(d));
  for (auto& c : centroids) {
    double norm = 0.0;
    for (auto& v : c) {
      v = std::abs(gauss(rng)) + 1e-3;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : c) v /= norm;
  }

  const double slope = spec.difficulty_coupling * std::min(spec.ai_accuracy, 1.0 - spec.ai_accuracy);
  std::vector<TaskInstance> out;
  out.reserve(spec.length);
  for (std::size_t i = 0; i < spec.length; ++i) {
    TaskInstance inst;
    inst.instance_id = "s" + std::to_string(i);
    inst.label = pick_class(rng);
    const double u = uniform01(rng);
    const double p_correct = std::clamp(spec.ai_accuracy + slope * (1.0 - 2.0 * u), 0.0, 1.0);
    const bool correct = uniform01(rng) < p_correct;
    const double u_class = uniform01(rng);
    inst.ai_prediction = correct ? inst.label : noisy_label(inst.label, K, 1.0, 0.0, u_class);
    inst.ai_confidence = p_correct;
    inst.features.resize(d);
    const auto& mu = centroids[inst.label];
    for (int j = 0; j < d; ++j) inst.features[j] = spec.snr * (1.0 - u) * mu[j] + spec.noise_std * gauss(rng);
    out.push_back(std::move(inst));
  }
  return out;
}

SharedStream make_synthetic_stream(const SyntheticTaskSpec& spec, std::uint64_t seed) {
  auto rng = make_rng(seed, {stream::kDataset});
  return std::make_shared<const InstanceStream>(generate_synthetic_stream(spec, rng), spec.class_count);
}

}  // namespace falcon
