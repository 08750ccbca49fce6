#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "falcon/cli/commands.hpp"
#include "falcon/errors.hpp"

namespace falcon::cli {

namespace {

std::vector<double> parse_targets(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--targets: not a number: '" + item + "'");
    }
  }
  return out;
}

int report(int code, const std::string& what) {
  std::cerr << "falcon: error: " << what << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Fatigue-aware learning-to-defer laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--workers", workers, "Collection worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory (overrides the config)");

  auto* train_cmd = app.add_subcommand("train", "Train a deferral policy");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the regime presets");
  std::string checkpoint;
  std::optional<std::string> regime, mode;
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--regime", regime, "sustained_high, normal_fatigue, rapid_fatigue, real_human_recall or all");
  eval_cmd->add_option("--mode", mode, "zero_shot or fine_tuned");

  auto* sweep_cmd = app.add_subcommand("sweep", "Train one policy per coverage target and merge the curves");
  std::optional<std::string> targets;
  sweep_cmd->add_option("--targets", targets, "Comma-separated coverage targets in (0, 1); empty for endpoints only");

  auto* bench_cmd = app.add_subcommand("genbench", "Write reproducible benchmark episodes");
  std::optional<std::string> bench_preset;
  std::optional<int> bench_episodes, bench_length;
  bench_cmd->add_option("--preset", bench_preset, "Fatigue preset");
  bench_cmd->add_option("--episodes", bench_episodes, "Number of episodes");
  bench_cmd->add_option("--length", bench_length, "Steps per episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) config.seed = *seed;
    if (workers) config.workers = *workers;
    if (!out.empty()) config.out = out;
    config.train.seed = config.seed;
    config.train.workers = config.workers;

    if (*train_cmd) {
      const auto outcome = cmd_train(config);
      std::cout << "checkpoint: " << outcome.checkpoint.string() << '\n';
    } else if (*eval_cmd) {
      cmd_eval(config, EvalOptions{checkpoint, regime, mode});
    } else if (*sweep_cmd) {
      if (targets) config.sweep.targets = parse_targets(*targets);
      cmd_sweep(config);
    } else if (*bench_cmd) {
      if (bench_preset) config.genbench.preset = *bench_preset;
      if (bench_episodes) config.genbench.episodes = *bench_episodes;
      if (bench_length) config.episode_length = *bench_length;
      cmd_genbench(config);
    }
  } catch (const UsageError& e) {
    return report(kExitUsage, e.what());
  } catch (const ConfigError& e) {
    return report(kExitConfig, e.what());
  } catch (const DataError& e) {
    return report(kExitData, e.what());
  } catch (const NumericError& e) {
    return report(kExitNumeric, e.what());
  } catch (const std::exception& e) {
    return report(kExitFailure, e.what());
  }
  return kExitOk;
}

}  // namespace falcon::cli
