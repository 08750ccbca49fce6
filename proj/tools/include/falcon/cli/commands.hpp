#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "falcon/cli/run_config.hpp"
#include "falcon/errors.hpp"
#include "falcon/eval.hpp"

namespace falcon::cli {

/// Bad command-line usage, e.g. an unknown regime name.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Output layout under config.out:
//   train:    checkpoint.txt, train_log.csv, resolved_config.json
//   eval:     curve_<regime>.csv per regime, auacc.csv, resolved_config.json
//   sweep:    target_<t>/{checkpoint.txt,train_log.csv}, curve.csv, auacc.csv,
//             resolved_config.json
//   genbench: instances.csv, fatigue.csv, resolved_config.json

struct TrainOutcome {
  TrainResult result;
  std::filesystem::path checkpoint;
};

TrainOutcome cmd_train(const RunConfig& config);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::optional<std::string> regime;  // overrides config.eval.regime
  std::optional<std::string> mode;
};

std::vector<RegimeResult> cmd_eval(const RunConfig& config, const EvalOptions& options);

/// FALCON curve first, then baseline curves when enabled.
std::vector<CoverageCurve> cmd_sweep(const RunConfig& config);

struct GenbenchOutcome {
  std::filesystem::path instances;
  std::filesystem::path fatigue;
  std::size_t rows = 0;
};

GenbenchOutcome cmd_genbench(const RunConfig& config);

void write_resolved_config(const RunConfig& config);

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitData = 4,
  kExitNumeric = 5,
};

/// Parses argv, runs the subcommand and maps exceptions onto exit codes.
int run_cli(int argc, char** argv);

}  // namespace falcon::cli
