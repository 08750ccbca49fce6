#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "falcon/baselines.hpp"
#include "falcon/env.hpp"
#include "falcon/policy_net.hpp"
#include "falcon/trainer.hpp"

namespace falcon {

/// Greedy (argmax) execution of a trained policy, hidden state reset per episode.
class FalconDeferrer final : public Deferrer {
 public:
  FalconDeferrer(const PolicyNet& net, const PolicyParams& params);
  std::string name() const override { return "falcon"; }
  void begin_episode(std::uint64_t episode_index) override;
  Action act(const EnvState& state, const TaskInstance& instance) override;

 private:
  const PolicyNet& net_;
  const PolicyParams& params_;
  RecurrentState hidden_;
};

struct EpisodeResult {
  double accuracy = 0.0;  // total reward / T
  double coverage = 0.0;  // 1 - rho_final / T
};

/// One test episode. Fills `record` with the trajectory when non-null.
EpisodeResult run_episode_greedy(Deferrer& deferrer, DeferralEnv& env, std::uint64_t episode_index,
                                 Trajectory* record = nullptr);

/// Mean accuracy and coverage of one deferrer over one test seed.
struct SeedPoint {
  double coverage = 0.0;
  double accuracy = 0.0;
};

/// Seed of the test streams derived from a test seed; keeps test episodes
/// apart from training episodes drawn with the same number.
std::uint64_t test_stream_seed(std::uint64_t test_seed);

/// Episodes [first_episode, first_episode + n) of `env`.
SeedPoint evaluate_deferrer(Deferrer& deferrer, const EpisodeConfig& env, int n_episodes,
                            std::uint64_t first_episode = 0);

/// Builds a baseline for a nominal coverage knob in [0, 1].
using CoverageKnob = std::function<std::unique_ptr<Deferrer>(double nominal_coverage)>;

/// Accuracy of a knob-driven baseline at realised coverage `target` on the
/// given episodes. Bisects the knob (realised coverage must be nondecreasing
/// in it), then interpolates linearly between the two bracketing evaluations.
SeedPoint evaluate_at_coverage(const CoverageKnob& make, const EpisodeConfig& env, int n_episodes, double target,
                               int bisection_steps = 20);

struct CurvePoint {
  double coverage = 0.0;
  double accuracy = 0.0;
  double std_error = 0.0;
};

struct CoverageCurve {
  std::string method;
  std::string regime;
  std::vector<std::uint64_t> seeds;
  std::vector<CurvePoint> points;  // strictly increasing coverage

  /// NumericError unless coverages strictly increase and all values lie in [0, 1].
  void validate() const;
};

/// Mean and standard error (sample sd / sqrt(n), 0 for n = 1) across seeds.
CurvePoint aggregate(std::span<const SeedPoint> per_seed);

/// Interior points, one group of per-seed results each, plus the human-only
/// (coverage 0) and AI-only (coverage 1) endpoints. Points are sorted by
/// coverage; an interior point landing on an existing coverage is merged into
/// it by averaging. ConfigError when there is nothing to build from.
CoverageCurve build_curve(std::string method, std::string regime, std::span<const std::vector<SeedPoint>> interior,
                          std::span<const SeedPoint> human_only, std::span<const SeedPoint> ai_only);

/// Trapezoid rule over linearly interpolated accuracy. IntegrationError unless
/// the curve has >= 2 points starting at coverage 0 and ending at 1.
double auacc(std::span<const CurvePoint> points);
double auacc(const CoverageCurve& curve);

// Curve files: header `method,regime,coverage,accuracy,std_error`, one row per
// point. AUACC summaries: header `method,regime,auacc`.
void write_curves(std::ostream& out, std::span<const CoverageCurve> curves);
std::vector<CoverageCurve> read_curves(std::istream& in);
void save_curves(const std::filesystem::path& path, std::span<const CoverageCurve> curves);
std::vector<CoverageCurve> load_curves(const std::filesystem::path& path);

struct AuaccRow {
  std::string method;
  std::string regime;
  double auacc = 0.0;
};
void write_auacc_summary(std::ostream& out, std::span<const AuaccRow> rows);
std::vector<AuaccRow> read_auacc_summary(std::istream& in);

/// Named test condition for the ablation study.
struct RegimePreset {
  std::string name;
  FatigueSource fatigue;
  int horizon_l = 100;

  /// NumericError when the preset breaks its regime's defining property:
  /// sustained_high above 0.8 throughout; rapid_fatigue within 0.05 of w_base
  /// by rho = L/2; real_human_recall at 0.78 for rho = 0 and within 0.01 of 0.66
  /// at rho = L.
  void check() const;
};

/// sustained_high, normal_fatigue, rapid_fatigue, real_human_recall.
const std::vector<RegimePreset>& regime_presets();
/// ConfigError listing valid names for an unknown regime.
const RegimePreset& regime(std::string_view name);
std::vector<std::string> regime_names();

enum class SuiteMode { ZeroShot, FineTuned };
SuiteMode parse_suite_mode(std::string_view text);
std::string_view to_string(SuiteMode mode);

struct SuiteConfig {
  SharedStream source;  // test episodes are drawn from here
  /// Fine-tuning pool; null means `source`.
  SharedStream fine_tune_source;
  int episode_length = 100;
  int test_episodes = 20;
  std::vector<std::uint64_t> test_seeds = {0, 1, 2};
  /// Used only in fine_tuned mode; starts from the given parameters.
  TrainConfig fine_tune;
};

struct RegimeResult {
  std::string regime;
  CurvePoint policy;  // the evaluated policy's own point
  CoverageCurve curve;
  double auacc = 0.0;
};

/// Test episodes use per-episode fatigue draws from each preset and episode
/// streams keyed by each test seed. zero_shot evaluates `params` as given;
/// fine_tuned continues training on each preset first. `params` is never
/// modified.
std::vector<RegimeResult> run_regime_suite(const PolicyNet& net, const PolicyParams& params,
                                           std::span<const RegimePreset> presets, SuiteMode mode,
                                           const SuiteConfig& config);

}  // namespace falcon
