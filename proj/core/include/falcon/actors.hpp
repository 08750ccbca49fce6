#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "falcon/fatigue.hpp"
#include "falcon/random.hpp"

namespace falcon {

/// One classification task: an embedding plus the frozen AI classifier's output.
struct TaskInstance {
  std::string instance_id;
  int label = 0;
  std::optional<int> ai_prediction;
  std::optional<double> ai_confidence;
  std::vector<double> features;

  bool operator==(const TaskInstance&) const = default;
};

/// Immutable, shareable set of instances with a fixed class count and width.
class InstanceStream {
 public:
  InstanceStream() = default;
  /// Validates label / prediction ranges and the feature width; SchemaError otherwise.
  InstanceStream(std::vector<TaskInstance> instances, int class_count);

  const std::vector<TaskInstance>& instances() const noexcept { return instances_; }
  const TaskInstance& operator[](std::size_t i) const { return instances_[i]; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  int class_count() const noexcept { return class_count_; }
  int feature_dim() const noexcept { return feature_dim_; }
  bool has_confidence() const noexcept;

 private:
  std::vector<TaskInstance> instances_;
  int class_count_ = 2;
  int feature_dim_ = 0;
};

using SharedStream = std::shared_ptr<const InstanceStream>;

/// Stored AI prediction. DataError when the instance carries none.
int ai_predict(const TaskInstance& instance);

/// Noisy label under a given noise rate: correct with probability 1 - eta,
/// otherwise uniform over the K - 1 wrong classes. `u_correct` and `u_class`
/// are independent U[0,1) draws.
int noisy_label(int label, int class_count, double eta, double u_correct, double u_class);

/// Simulated expert whose noise rate is 1 - performance(params, rho).
class HumanExpert {
 public:
  HumanExpert(FatigueParams params, int class_count, Rng rng);

  int predict(const TaskInstance& instance, double rho);
  double noise_rate(double rho) const { return 1.0 - performance(params_, rho); }

  const FatigueParams& params() const noexcept { return params_; }
  int class_count() const noexcept { return class_count_; }

 private:
  FatigueParams params_;
  int class_count_;
  Rng rng_;
};

/// Generator settings for synthetic task streams.
///
/// Each instance gets a latent difficulty u ~ U[0,1). The AI is correct with
/// probability ai_accuracy + c * (1 - 2u), where c = difficulty_coupling *
/// min(ai_accuracy, 1 - ai_accuracy); the marginal accuracy is exactly
/// ai_accuracy for any coupling. ai_confidence reports that probability, so it
/// is calibrated. Features are snr * (1 - u) * mu_label + N(0, noise_std^2),
/// with class centroids on the positive orthant of the unit sphere, so
/// difficulty is linearly readable from the feature sum.
struct SyntheticTaskSpec {
  int class_count = 10;
  int feature_dim = 8;
  double ai_accuracy = 0.65;
  double difficulty_coupling = 1.0;
  double snr = 3.0;
  double noise_std = 0.3;
  std::size_t length = 1000;

  void validate() const;
};

std::vector<TaskInstance> generate_synthetic_stream(const SyntheticTaskSpec& spec, Rng& rng);

/// Generator wrapped into a validated stream.
SharedStream make_synthetic_stream(const SyntheticTaskSpec& spec, std::uint64_t seed);

// Instance record files: delimited text with a mandatory header
//   instance_id, label, ai_prediction, [ai_confidence,] f0, f1, ..., f{d-1}
// An empty ai_prediction / ai_confidence cell means "absent". Reals are written
// in shortest round-trip form, so streams reload bit-identically.
struct StreamFormat {
  char delimiter = ',';
  int class_count = 2;
};

SharedStream load_instance_stream(const std::filesystem::path& path, const StreamFormat& format);
void save_instance_stream(const std::filesystem::path& path, const InstanceStream& stream,
                          char delimiter = ',');

}  // namespace falcon
