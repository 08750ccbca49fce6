#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "falcon/actors.hpp"
#include "falcon/env.hpp"
#include "falcon/policy_net.hpp"
#include "falcon/trainer.hpp"

namespace falcon::cli {

struct TaskConfig {
  enum class Kind { Synthetic, File };
  Kind kind = Kind::Synthetic;
  SyntheticTaskSpec synthetic{.length = 5000};
  std::uint64_t seed = 7;       // dataset seed, independent of the run seed
  std::uint64_t test_seed = 8;  // held-out synthetic pool for evaluation
  std::filesystem::path path;
  std::filesystem::path test_path;  // held-out file pool; empty reuses `path`
  int class_count = 10;  // file tasks only
};

struct FatigueConfig {
  std::string preset = "normal_fatigue";
  std::filesystem::path preset_file;  // optional extra presets
  std::optional<FatigueParamRanges> ranges;  // inline ranges win over `preset`
};

struct EvalConfig {
  int test_episodes = 20;
  std::vector<std::uint64_t> test_seeds = {0, 1, 2};
  std::string regime = "all";
  std::string mode = "zero_shot";
};

struct SweepConfig {
  std::vector<double> targets = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double band_width = 0.1;
  bool baselines = true;
};

struct GenbenchConfig {
  std::string preset = "cifar";
  int episodes = 20;
};

/// Everything a run needs. `seed` drives initialization, episode streams,
/// policy sampling and minibatch shuffling.
struct RunConfig {
  TaskConfig task;
  FatigueConfig fatigue;
  int episode_length = 100;
  NetConfig network;
  TrainConfig train;
  int checkpoint_every = 0;  // iterations; 0 = only at the end
  EvalConfig eval;
  SweepConfig sweep;
  GenbenchConfig genbench;
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out = "runs/default";

  /// ConfigError naming the offending field path.
  void validate() const;
};

/// Strict: unknown keys and wrongly typed values raise ConfigError with the
/// field path. Relative paths resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// Every field, defaults included.
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

FatigueSource resolve_fatigue(const RunConfig& config);
SharedStream load_task(const RunConfig& config);
/// Pool that test episodes are drawn from. Synthetic tasks regenerate the same
/// spec under `task.test_seed`; file tasks read `task.test_path` when set.
SharedStream load_test_task(const RunConfig& config);
EpisodeConfig make_episode_config(const RunConfig& config, SharedStream source);

}  // namespace falcon::cli
