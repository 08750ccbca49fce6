#include "falcon/cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "falcon/baselines.hpp"
#include "falcon/errors.hpp"
#include "falcon/presets.hpp"

namespace falcon::cli {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

NetConfig net_config_for(const RunConfig& config, const InstanceStream& source) {
  NetConfig nc = config.network;
  nc.feature_dim = source.feature_dim();
  return nc;
}

std::string target_dir_name(double target) { return fmt::format("target_{:.3f}", target); }

// Trains one policy, streaming the log and periodic checkpoints into `dir`.
TrainOutcome train_into(const RunConfig& config, const EpisodeConfig& env, const PolicyNet& net, const fs::path& dir) {
  ensure_dir(dir);
  const fs::path ckpt = dir / "checkpoint.txt";
  std::ofstream log(dir / "train_log.csv");
  if (!log) throw DataError("cannot write " + (dir / "train_log.csv").string());
  write_training_log_header(log);

  const int total = config.train.iterations;
  auto on_iteration = [&](const IterationLog& row, const PolicyParams& params, const Multipliers&) {
    write_training_log_row(log, row);
    log.flush();
    const int done = row.iteration + 1;
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0) save_checkpoint(ckpt, params);
    if (done % 10 == 0 || done == total) {
      std::cout << fmt::format("[{}] iteration {}/{} coverage {:.3f} accuracy {:.3f} lambda_u {:.4f} lambda_l {:.4f}\n",
                               dir.filename().string(), done, total, row.coverage, row.mean_reward, row.lambda_u,
                               row.lambda_l);
    }
  };

  TrainOutcome outcome;
  try {
    outcome.result = train(config.train, env, net, init_params(net.config(), config.seed), on_iteration);
  } catch (const TrainingAborted& e) {
    save_checkpoint(ckpt, e.last_good());
    throw;
  }
  save_checkpoint(ckpt, outcome.result.params);
  outcome.checkpoint = ckpt;
  return outcome;
}

std::vector<SeedPoint> evaluate_over_seeds(const RunConfig& config, EpisodeConfig env,
                                           const std::function<std::unique_ptr<Deferrer>()>& make) {
  std::vector<SeedPoint> points;
  for (const auto seed : config.eval.test_seeds) {
    env.seed = test_stream_seed(seed);
    auto deferrer = make();
    points.push_back(evaluate_deferrer(*deferrer, env, config.eval.test_episodes));
  }
  return points;
}

// A baseline read at the coverage `reference` reached on each test seed.
std::vector<SeedPoint> matched_over_seeds(const RunConfig& config, EpisodeConfig env, const CoverageKnob& knob,
                                          const std::vector<SeedPoint>& reference) {
  std::vector<SeedPoint> points;
  for (std::size_t i = 0; i < config.eval.test_seeds.size(); ++i) {
    env.seed = test_stream_seed(config.eval.test_seeds[i]);
    points.push_back(evaluate_at_coverage(knob, env, config.eval.test_episodes, reference[i].coverage));
  }
  return points;
}

}  // namespace

void write_resolved_config(const RunConfig& config) {
  ensure_dir(config.out);
  std::ofstream out(config.out / "resolved_config.json");
  if (!out) throw DataError("cannot write " + (config.out / "resolved_config.json").string());
  out << run_config_to_json(config).dump(2) << '\n';
}

TrainOutcome cmd_train(const RunConfig& config) {
  config.validate();
  write_resolved_config(config);
  const auto source = load_task(config);
  const EpisodeConfig env = make_episode_config(config, source);
  const PolicyNet net(net_config_for(config, *source));
  return train_into(config, env, net, config.out);
}

std::vector<RegimeResult> cmd_eval(const RunConfig& config, const EvalOptions& options) {
  config.validate();
  const std::string regime_name = options.regime.value_or(config.eval.regime);
  const SuiteMode mode = parse_suite_mode(options.mode.value_or(config.eval.mode));

  std::vector<RegimePreset> presets;
  if (regime_name == "all") {
    presets = regime_presets();
  } else {
    try {
      presets.push_back(regime(regime_name));
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }

  const PolicyParams params = load_checkpoint(options.checkpoint);
  const auto source = load_task(config);
  const auto test_source = load_test_task(config);
  if (params.config.feature_dim != source->feature_dim()) {
    throw ConfigError(fmt::format("checkpoint expects {} features but the task provides {}",
                                  params.config.feature_dim, source->feature_dim()));
  }
  write_resolved_config(config);
  const PolicyNet net(params.config);

  SuiteConfig suite;
  suite.source = test_source;
  suite.fine_tune_source = source;
  suite.episode_length = config.episode_length;
  suite.test_episodes = config.eval.test_episodes;
  suite.test_seeds = config.eval.test_seeds;
  suite.fine_tune = config.train;

  const auto before = params.hash();
  auto results = run_regime_suite(net, params, presets, mode, suite);
  if (params.hash() != before) throw LifecycleError("evaluation modified the policy parameters");

  std::vector<AuaccRow> summary;
  for (const auto& r : results) {
    const std::vector<CoverageCurve> one = {r.curve};
    save_curves(config.out / fmt::format("curve_{}.csv", r.regime), one);
    summary.push_back({r.curve.method, r.regime, r.auacc});
    std::cout << fmt::format("{} ({}): coverage {:.3f} accuracy {:.3f} AUACC {:.4f}\n", r.regime, to_string(mode),
                             r.policy.coverage, r.policy.accuracy, r.auacc);
  }
  std::ofstream out(config.out / "auacc.csv");
  write_auacc_summary(out, summary);
  return results;
}

std::vector<CoverageCurve> cmd_sweep(const RunConfig& config) {
  config.validate();
  write_resolved_config(config);
  const auto source = load_task(config);
  const EpisodeConfig env = make_episode_config(config, source);
  EpisodeConfig test_env = env;
  test_env.source = load_test_task(config);
  if (test_env.source->feature_dim() != source->feature_dim()) {
    throw ConfigError("test pool feature dimension differs from the training pool");
  }
  const PolicyNet net(net_config_for(config, *source));
  const std::string regime_label = config.fatigue.ranges ? "inline" : config.fatigue.preset;

  const auto human = evaluate_over_seeds(config, test_env, [] { return std::make_unique<HumanOnlyDeferrer>(); });
  const auto ai = evaluate_over_seeds(config, test_env, [] { return std::make_unique<AiOnlyDeferrer>(); });

  std::shared_ptr<const StaticGate> gate;
  if (config.sweep.baselines && !config.sweep.targets.empty()) {
    StaticGateConfig gc;
    gc.seed = config.seed;
    const double h = mean_human_accuracy(env.fatigue, config.episode_length, 200, config.seed);
    gate = std::make_shared<StaticGate>(train_static_gate(source->instances(), h, gc));
  }

  std::vector<std::vector<SeedPoint>> falcon, random, gated, thresholded;
  for (const double target : config.sweep.targets) {
    RunConfig run = config;
    run.train.budget = Budget::for_coverage(target, config.sweep.band_width);
    const auto outcome = train_into(run, env, net, config.out / target_dir_name(target));
    const PolicyParams& params = outcome.result.params;
    falcon.push_back(evaluate_over_seeds(config, test_env, [&] { return std::make_unique<FalconDeferrer>(net, params); }));

    if (!config.sweep.baselines) continue;
    // Baselines are read at the coverage FALCON actually reached on each seed.
    const auto& reached = falcon.back();
    random.push_back(matched_over_seeds(config, test_env, [&](double c) {
      return std::make_unique<RandomDeferrer>(c, config.seed);
    }, reached));
    gated.push_back(matched_over_seeds(config, test_env, [&](double c) {
      return std::make_unique<StaticGateDeferrer>(gate, gate_threshold_for_coverage(*gate, source->instances(), c));
    }, reached));
    if (source->has_confidence()) {
      thresholded.push_back(matched_over_seeds(config, test_env, [&](double c) {
        return std::make_unique<ThresholdDeferrer>(threshold_for_coverage(source->instances(), c));
      }, reached));
    }
  }

  std::vector<CoverageCurve> curves;
  curves.push_back(build_curve("falcon", regime_label, falcon, human, ai));
  if (config.sweep.baselines && !config.sweep.targets.empty()) {
    curves.push_back(build_curve("random", regime_label, random, human, ai));
    curves.push_back(build_curve("static_gate", regime_label, gated, human, ai));
    if (!thresholded.empty()) curves.push_back(build_curve("threshold", regime_label, thresholded, human, ai));
  }
  std::vector<AuaccRow> summary;
  for (auto& c : curves) {
    c.seeds = config.eval.test_seeds;
    summary.push_back({c.method, c.regime, auacc(c)});
    std::cout << fmt::format("{}: AUACC {:.4f} over {} points\n", c.method, summary.back().auacc, c.points.size());
  }
  save_curves(config.out / "curve.csv", curves);
  std::ofstream out(config.out / "auacc.csv");
  write_auacc_summary(out, summary);
  return curves;
}

GenbenchOutcome cmd_genbench(const RunConfig& config) {
  config.validate();
  RunConfig bench = config;
  bench.fatigue.preset = config.genbench.preset;
  bench.fatigue.ranges.reset();
  write_resolved_config(bench);
  const auto source = load_task(bench);

  GenbenchOutcome outcome;
  outcome.instances = config.out / "instances.csv";
  outcome.fatigue = config.out / "fatigue.csv";

  std::vector<TaskInstance> rows;
  std::vector<EpisodeFatigue> params;
  if (config.genbench.episodes > 0) {
    DeferralEnv env(make_episode_config(bench, source));
    for (int ep = 0; ep < config.genbench.episodes; ++ep) {
      env.reset(static_cast<std::uint64_t>(ep));
      params.push_back({static_cast<std::uint64_t>(ep), env.fatigue()});
      while (!env.terminal()) {
        TaskInstance inst = env.current_instance();
        inst.instance_id = fmt::format("{}/{}", ep, inst.instance_id);
        rows.push_back(std::move(inst));
        env.step(Action::AI);
      }
    }
  } else {
    resolve_fatigue(bench);
  }
  outcome.rows = rows.size();
  save_instance_stream(outcome.instances, InstanceStream(std::move(rows), source->class_count()));
  save_fatigue_table(outcome.fatigue, params);
  std::cout << fmt::format("wrote {} instance rows and {} fatigue rows to {}\n", outcome.rows, params.size(),
                           config.out.string());
  return outcome;
}

}  // namespace falcon::cli
