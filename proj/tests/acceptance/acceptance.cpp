// Acceptance run: one PASS/FAIL line per criterion, diagnostics on stderr.
// FALCON_ACCEPTANCE_ONLY=1,4,7 restricts the run to the listed criteria.
// FALCON_ACCEPTANCE_KEEP=1 keeps the training outputs.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "falcon/actors.hpp"
#include "falcon/baselines.hpp"
#include "falcon/cli/commands.hpp"
#include "falcon/cli/run_config.hpp"
#include "falcon/env.hpp"
#include "falcon/eval.hpp"
#include "falcon/fatigue.hpp"
#include "falcon/multipliers.hpp"
#include "falcon/policy_net.hpp"
#include "falcon/presets.hpp"
#include "falcon/returns.hpp"
#include "falcon/trainer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace falcon;
namespace ft = falcon::testing;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kCurveTol = 1e-12;
constexpr double kGaeTol = 1e-10;
constexpr double kGradRelTol = 1e-3;
constexpr double kGradAbsFloor = 1e-7;
constexpr double kGradStep = 1e-6;
constexpr double kNoiseSigmas = 3.0;
constexpr double kChiAlpha = 0.001;
constexpr double kCoverageLo = 0.30;
constexpr double kCoverageHi = 0.50;
constexpr double kRandomMargin = 0.02;
constexpr double kInteriorMargin = 0.01;
constexpr int kTestEpisodes = 20;
const std::vector<std::uint64_t> kSeeds = {0, 1, 2};
const std::vector<double> kTargets = {0.2, 0.4, 0.6};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};

void fail(Verdict& v, const std::string& why) {
  v.pass = false;
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += why;
}

void note(Verdict& v, const std::string& text) {
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += text;
}

void within_time(Verdict& v, double secs, double limit) {
  if (secs >= limit) fail(v, fmt::format("took {:.1f}s, limit {:.0f}s", secs, limit));
  else note(v, fmt::format("{:.2f}s", secs));
}

// Silences the per-iteration progress lines of the CLI commands.
class QuietStdout {
 public:
  QuietStdout() : saved_(std::cout.rdbuf(sink_.rdbuf())) {}
  ~QuietStdout() { std::cout.rdbuf(saved_); }
  QuietStdout(const QuietStdout&) = delete;
  QuietStdout& operator=(const QuietStdout&) = delete;

 private:
  std::ostringstream sink_;
  std::streambuf* saved_;
};

// ---------------------------------------------------------------------------
// 1-6 and 10: exact suites

Verdict fatigue_exactness() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto ex = ft::example_one();
  const std::vector<std::pair<double, double>> expect = {{0.0, 0.9}, {10.0, 1.0}, {75.0, 0.85}};
  for (auto [rho, w] : expect) {
    const double got = performance(ex, rho);
    if (std::abs(got - w) > kCurveTol) fail(v, fmt::format("performance({}) = {:.15f}, want {}", rho, got, w));
  }
  const FatigueParamRanges wide{.name = "wide",
                                .w0 = {0.3, 1.0},
                                .w_peak = {0.3, 1.0},
                                .w_base = {0.0, 1.0},
                                .rho_hat = {0.01, 0.5},
                                .rho_bar = {0.02, 0.99},
                                .k = {0.01, 1.0},
                                .horizon_l = 200};
  Rng rng = make_rng(2024);
  constexpr int kGrid = 10000;
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const FatigueParams p = sample_params(wide, rng);
    const double boundary = p.rho_hat * p.horizon_l;
    const double rho_max = 2.0 * p.horizon_l;
    const double h = rho_max / kGrid;
    for (int i = 1; i <= kGrid; ++i) {
      const double rho = h * i;
      const double w = performance(p, rho);
      if (w < std::min(p.w_base, p.w0) - kCurveTol || w > p.w_peak + kCurveTol) ++violations;
      if (rho <= boundary) {
        if (w < performance(p, rho - h) - kCurveTol) ++violations;
      } else if (rho - h > boundary && decay_branch(p, rho) > decay_branch(p, rho - h)) {
        ++violations;
      }
    }
  }
  if (violations > 0) fail(v, fmt::format("{} monotonicity/bound violations", violations));
  within_time(v, seconds_since(t0), 1.0);
  return v;
}

TaskInstance labelled(int label) {
  TaskInstance inst;
  inst.instance_id = "x";
  inst.label = label;
  inst.ai_prediction = label;
  inst.features = {0.0};
  return inst;
}

Verdict human_noise() {
  Verdict v;
  const auto t0 = Clock::now();
  constexpr long n = 100000;
  for (int K : {2, 4, 100}) {
    for (double eta : {0.0, 0.3, 0.9}) {
      HumanExpert expert(ft::constant_fatigue(1.0 - eta), K, make_rng(K * 1000 + std::lround(eta * 10)));
      const int truth = K - 1;
      std::vector<long> wrong(K, 0);
      long correct = 0;
      for (long i = 0; i < n; ++i) {
        const int y = expert.predict(labelled(truth), 0.0);
        if (y == truth) ++correct;
        else ++wrong[y];
      }
      const double rate = static_cast<double>(correct) / n;
      const double se = std::sqrt(eta * (1.0 - eta) / n);
      if (std::abs(rate - (1.0 - eta)) > kNoiseSigmas * se + 1e-12) {
        fail(v, fmt::format("K={} eta={} correct rate {:.5f}", K, eta, rate));
      }
      const long total_wrong = n - correct;
      // Uniformity needs at least two wrong classes and some wrong answers.
      if (K > 2 && total_wrong > 0) {
        wrong.pop_back();
        const double stat = ft::chi_square_statistic(wrong, static_cast<double>(total_wrong) / (K - 1));
        const double crit = ft::chi_square_critical(K - 2, kChiAlpha);
        if (stat >= crit) fail(v, fmt::format("K={} eta={} chi2 {:.1f} >= {:.1f}", K, eta, stat, crit));
      }
    }
  }
  within_time(v, seconds_since(t0), 10.0);
  return v;
}

Verdict transition_exactness() {
  Verdict v;
  const auto t0 = Clock::now();
  constexpr int T = 12;
  DeferralEnv env(ft::make_env(ft::standard_stream(100), ft::example_one(), T));
  long bad = 0;
  for (unsigned mask = 0; mask < (1u << T); ++mask) {
    EnvState s = env.reset(0);
    Trajectory traj;
    int workload = 0;
    for (int t = 0; t < T; ++t) {
      const Action a = (mask >> t) & 1u ? Action::Human : Action::AI;
      const auto out = env.step(a);
      record_step(traj, s, a, out);
      workload += a == Action::Human;
      if (env.workload() != workload || traj.workloads[t] != workload) ++bad;
      if (out.cost != (a == Action::Human ? 1 : 0)) ++bad;
      if (out.next_state) {
        s = *out.next_state;
        if (s.workload != workload) ++bad;
      }
    }
    if (traj.total_cost() != std::popcount(mask)) ++bad;
    if (coverage(traj) != 1.0 - static_cast<double>(std::popcount(mask)) / T) ++bad;
  }
  if (bad > 0) fail(v, fmt::format("{} identity violations over {} sequences", bad, 1u << T));
  else note(v, fmt::format("{} sequences", 1u << T));
  within_time(v, seconds_since(t0), 5.0);
  return v;
}

Verdict gradient_correctness() {
  Verdict v;
  const auto t0 = Clock::now();
  const PolicyNet net(ft::tiny_net(4));
  auto spec = ft::standard_task(400);
  spec.feature_dim = 4;
  const auto env = ft::make_env(make_synthetic_stream(spec, 3), preset("flickr"), 6, 3);
  PolicyParams behaviour = init_params(net.config(), 3);
  Rng rng = make_rng(3, {99});
  for (Eigen::Index i = 0; i < behaviour.values.size(); ++i) behaviour.values[i] += uniform(rng, -0.5, 0.5);
  PolicyParams current = behaviour;
  // Far enough from the behaviour policy that some ratios are clipped.
  for (Eigen::Index i = 0; i < current.values.size(); ++i) current.values[i] += uniform(rng, -0.3, 0.3);

  std::size_t checked = 0;
  for (bool normalize : {false, true}) {
    TrainConfig tc;
    tc.seed = 3;
    tc.entropy_coef = 0.01;
    tc.normalize_penalty = normalize;
    auto fx = ft::make_loss_fixture(net, behaviour, env, 4, tc);
    Multipliers m;
    m.lambda_u = 0.6;
    m.lambda_l = 0.3;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(current.values.size());
    const auto report = ppo_losses(net, current, fx.batch, m, tc, env.length, &grad);
    auto f = [&](const Eigen::VectorXd& x) {
      PolicyParams q = current;
      q.values = x;
      return ppo_losses(net, q, fx.batch, m, tc, env.length, nullptr).total;
    };
    const auto check = ft::check_gradient(f, current.values, grad, kGradStep, kGradRelTol, kGradAbsFloor);
    checked += static_cast<std::size_t>(grad.size());
    if (check.failures > 0) {
      fail(v, fmt::format("normalize={} {} coordinates off, worst relative {:.2e} at {}", normalize, check.failures,
                          check.worst_relative, check.worst_index));
    }
    note(v, fmt::format("clip fraction {:.2f}", report.clip_fraction));
  }
  note(v, fmt::format("{} coordinates", checked));
  within_time(v, seconds_since(t0), 30.0);
  return v;
}

Verdict gae_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  Rng rng = make_rng(5);
  double worst = 0.0;
  for (auto [gamma, lambda] : {std::pair{0.99, 0.95}, std::pair{1.0, 1.0}, std::pair{0.5, 0.0}}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(uniform01(rng) * 12);
      std::vector<double> s(n), values(n);
      for (int i = 0; i < n; ++i) {
        s[i] = uniform01(rng) < 0.5 ? 1.0 : 0.0;
        values[i] = uniform(rng, -2.0, 2.0);
      }
      const auto got = compute_returns_and_advantages(s, values, gamma, lambda);
      const auto want = ft::brute_force_gae(s, values, gamma, lambda);
      for (int i = 0; i < n; ++i) {
        worst = std::max({worst, std::abs(got.advantages[i] - want.advantages[i]),
                          std::abs(got.returns[i] - want.returns[i])});
      }
    }
  }
  if (worst > kGaeTol) fail(v, fmt::format("max deviation {:.2e}", worst));
  else note(v, fmt::format("max deviation {:.1e}", worst));
  within_time(v, seconds_since(t0), 5.0);
  return v;
}

Verdict multiplier_arithmetic() {
  Verdict v;
  MultiplierConfig plain;
  plain.mode = MultiplierMode::PlainGradient;
  plain.learning_rate = 0.035;

  Multipliers m;
  m.lambda_u = 0.001;
  m.lambda_l = 0.001;
  const auto up = update_multipliers(m, 0.8, {0.55, 0.65}, plain);
  if (std::abs(up.lambda_u - 0.00625) > 1e-15) fail(v, fmt::format("lambda_u {:.17g}", up.lambda_u));
  if (up.lambda_l != 0.0) fail(v, fmt::format("lambda_l not projected to 0: {}", up.lambda_l));

  Rng rng = make_rng(6);
  for (auto mode : {MultiplierMode::PlainGradient, MultiplierMode::Adam}) {
    MultiplierConfig cfg;
    cfg.mode = mode;
    Multipliers cur;
    cur.lambda_u = 0.4;
    cur.lambda_l = 0.4;
    for (int i = 0; i < 1000; ++i) {
      const auto next = update_multipliers(cur, uniform(rng, 0.55, 0.65), {0.55, 0.65}, cfg);
      if (next.lambda_u > cur.lambda_u || next.lambda_l > cur.lambda_l) {
        fail(v, "in-band step increased a multiplier");
        break;
      }
      if (next.lambda_u < 0.0 || next.lambda_l < 0.0) fail(v, "negative multiplier");
      cur = next;
    }
  }
  return v;
}

std::vector<CurvePoint> points(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<CurvePoint> out;
  for (auto [x, y] : xy) out.push_back({x, y, 0.0});
  return out;
}

Verdict auacc_exactness() {
  Verdict v;
  const std::vector<std::pair<std::vector<CurvePoint>, double>> cases = {
      {points({{0.0, 0.7}, {0.3, 0.7}, {1.0, 0.7}}), 0.7},
      {points({{0.0, 0.8}, {0.5, 0.9}, {1.0, 0.7}}), 0.825},
      {points({{0.0, 0.0}, {1.0, 1.0}}), 0.5},
  };
  for (const auto& [pts, want] : cases) {
    const double got = auacc(pts);
    if (std::abs(got - want) > kCurveTol) fail(v, fmt::format("AUACC {:.15f}, want {}", got, want));
  }
  Rng rng = make_rng(10);
  int broken = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(uniform01(rng) * 9);
    std::vector<double> xs = {0.0, 1.0};
    for (int i = 0; i < n - 2; ++i) xs.push_back(uniform01(rng));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<CurvePoint> low, high;
    std::vector<double> ylow;
    for (double x : xs) {
      const double a = uniform01(rng);
      const double b = a + (1.0 - a) * uniform01(rng);
      low.push_back({x, a, 0.0});
      high.push_back({x, b, 0.0});
      ylow.push_back(a);
    }
    if (auacc(high) < auacc(low)) ++broken;
    if (std::abs(auacc(low) - ft::trapezoid(xs, ylow)) > kCurveTol) ++broken;
  }
  if (broken > 0) fail(v, fmt::format("{} of 1000 random pairs broke dominance or the oracle", broken));
  return v;
}

// ---------------------------------------------------------------------------
// 7-9, 11, 12: training runs

// Shared training setup for the behavioural criteria; see the README for the
// deviations from the library defaults.
cli::RunConfig training_config(const std::string& regime, Budget budget, std::uint64_t seed, const fs::path& out) {
  cli::RunConfig c;
  c.fatigue.preset = regime;
  c.episode_length = 100;
  c.train.gamma = 1.0;
  c.train.entropy_coef = 0.03;
  c.train.learning_rate = 1e-3;
  c.train.lagrangian_lr = 0.005;
  c.train.iterations = 300;
  c.train.budget = budget;
  c.seed = seed;
  c.train.seed = seed;
  c.eval.test_episodes = kTestEpisodes;
  c.eval.test_seeds = {seed};
  c.out = out;
  return c;
}

struct TrainedPolicy {
  cli::RunConfig config;
  PolicyParams params;
  double train_seconds = 0.0;
};

TrainedPolicy train_policy(const cli::RunConfig& config) {
  const auto t0 = Clock::now();
  TrainedPolicy p;
  p.config = config;
  {
    QuietStdout quiet;
    p.params = cli::cmd_train(config).result.params;
  }
  p.train_seconds = seconds_since(t0);
  return p;
}

// Held-out episodes for one trained policy: test pool, test stream seed.
EpisodeConfig test_env_for(const cli::RunConfig& config) {
  EpisodeConfig env = cli::make_episode_config(config, cli::load_test_task(config));
  env.seed = test_stream_seed(config.seed);
  return env;
}

// Coverage of the trained (stochastic) policy on held-out episodes; the
// quantity the budget constrains.
double stochastic_coverage(const PolicyNet& net, const TrainedPolicy& p) {
  const auto env = test_env_for(p.config);
  const auto trajs = collect(net, p.params, env, kTestEpisodes, 0, env.seed, env.length);
  double s = 0.0;
  for (const auto& t : trajs) s += coverage(t);
  return s / static_cast<double>(trajs.size());
}

SeedPoint greedy_point(const PolicyNet& net, const TrainedPolicy& p) {
  FalconDeferrer f(net, p.params);
  return evaluate_deferrer(f, test_env_for(p.config), kTestEpisodes);
}

struct Endpoints {
  std::vector<SeedPoint> human, ai;
};

Endpoints endpoints_for(const std::vector<cli::RunConfig>& configs) {
  Endpoints e;
  for (const auto& c : configs) {
    HumanOnlyDeferrer h;
    AiOnlyDeferrer a;
    const auto env = test_env_for(c);
    e.human.push_back(evaluate_deferrer(h, env, kTestEpisodes));
    e.ai.push_back(evaluate_deferrer(a, env, kTestEpisodes));
  }
  return e;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Interior dominance over both endpoints, reported for one regime.
void check_interior(Verdict& v, const std::string& regime, const CoverageCurve& curve) {
  curve.validate();
  const double lo = curve.points.front().accuracy;
  const double hi = curve.points.back().accuracy;
  double best_gain = -1.0;
  double best_cov = 0.0;
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
    const double gain = curve.points[i].accuracy - std::max(lo, hi);
    if (gain > best_gain) {
      best_gain = gain;
      best_cov = curve.points[i].coverage;
    }
  }
  const std::string text = fmt::format("{}: human {:.3f} ai {:.3f} best interior gain {:+.3f} at coverage {:.2f}",
                                       regime, lo, hi, best_gain, best_cov);
  if (curve.points.size() < 3 || best_gain < kInteriorMargin) fail(v, text);
  else note(v, text);
}

struct Suite {
  fs::path root;
  std::map<std::uint64_t, TrainedPolicy> normal;                           // criterion 7, by seed
  std::map<std::pair<double, std::uint64_t>, TrainedPolicy> rapid;        // criterion 8, by (target, seed)
  std::map<std::pair<double, std::uint64_t>, SeedPoint> rapid_falcon;
};

Verdict constraint_satisfaction(Suite& s) {
  Verdict v;
  const PolicyNet net(NetConfig{});
  std::vector<double> covs;
  for (auto seed : kSeeds) {
    const auto config = training_config("normal_fatigue", {0.55, 0.65}, seed, s.root / fmt::format("c7_seed{}", seed));
    auto p = train_policy(config);
    const double cov = stochastic_coverage(net, p);
    const auto greedy = greedy_point(net, p);
    covs.push_back(cov);
    const std::string text = fmt::format("seed {} coverage {:.3f} (greedy {:.3f}) in {:.0f}s", seed, cov,
                                         greedy.coverage, p.train_seconds);
    if (cov < kCoverageLo || cov > kCoverageHi) fail(v, text);
    else note(v, text);
    if (p.train_seconds >= 600.0) fail(v, "over 10 min for one seed");
    s.normal.emplace(seed, std::move(p));
  }
  note(v, fmt::format("mean {:.3f}", mean(covs)));
  return v;
}

Verdict ordering_reproduction(Suite& s) {
  Verdict v;
  const auto t0 = Clock::now();
  const PolicyNet net(NetConfig{});
  std::map<double, std::vector<double>> falcon_acc, random_acc, gate_acc, cov;
  for (auto seed : kSeeds) {
    const auto probe = training_config("rapid_fatigue", {}, seed, s.root);
    const auto pool = cli::load_task(probe);
    const auto train_env = cli::make_episode_config(probe, pool);
    StaticGateConfig gc;
    gc.seed = seed;
    const double h = mean_human_accuracy(train_env.fatigue, probe.episode_length, 200, seed);
    const auto gate = std::make_shared<const StaticGate>(train_static_gate(pool->instances(), h, gc));
    for (double target : kTargets) {
      const auto config = training_config("rapid_fatigue", Budget::for_coverage(target, 0.1), seed,
                                          s.root / fmt::format("c8_target{:.1f}_seed{}", target, seed));
      auto p = train_policy(config);
      const auto env = test_env_for(config);
      const SeedPoint f = greedy_point(net, p);
      // Baselines read at exactly the coverage FALCON reached on these episodes.
      const SeedPoint rp = evaluate_at_coverage(
          [&](double c) { return std::make_unique<RandomDeferrer>(c, seed); }, env, kTestEpisodes, f.coverage);
      const SeedPoint gp = evaluate_at_coverage(
          [&](double c) {
            return std::make_unique<StaticGateDeferrer>(gate, gate_threshold_for_coverage(*gate, pool->instances(), c));
          },
          env, kTestEpisodes, f.coverage);
      std::cerr << fmt::format("  [8] target {:.1f} seed {}: falcon {:.3f}@{:.3f} random {:.3f}@{:.3f} "
                               "gate {:.3f}@{:.3f} ({:.0f}s)\n",
                               target, seed, f.accuracy, f.coverage, rp.accuracy, rp.coverage, gp.accuracy,
                               gp.coverage, p.train_seconds);
      falcon_acc[target].push_back(f.accuracy);
      random_acc[target].push_back(rp.accuracy);
      gate_acc[target].push_back(gp.accuracy);
      cov[target].push_back(f.coverage);
      s.rapid_falcon[{target, seed}] = f;
      s.rapid.emplace(std::pair{target, seed}, std::move(p));
    }
  }
  for (double target : kTargets) {
    const double fa = mean(falcon_acc[target]);
    const double ra = mean(random_acc[target]);
    const double ga = mean(gate_acc[target]);
    const std::string text = fmt::format("target {:.1f} (coverage {:.3f}): falcon {:.4f} random {:.4f} gate {:.4f}",
                                         target, mean(cov[target]), fa, ra, ga);
    if (fa < ra + kRandomMargin || fa < ga) fail(v, text);
    else note(v, text);
  }
  within_time(v, seconds_since(t0), 1800.0);
  return v;
}

Verdict remark_reproduction(Suite& s) {
  Verdict v;
  const PolicyNet net(NetConfig{});
  {
    std::vector<cli::RunConfig> configs;
    std::vector<SeedPoint> falcon;
    for (const auto& [seed, p] : s.normal) {
      configs.push_back(p.config);
      falcon.push_back(greedy_point(net, p));
    }
    const auto e = endpoints_for(configs);
    const std::vector<std::vector<SeedPoint>> interior = {falcon};
    check_interior(v, "normal_fatigue", build_curve("falcon", "normal_fatigue", interior, e.human, e.ai));
  }
  {
    std::vector<cli::RunConfig> configs;
    for (auto seed : kSeeds) configs.push_back(s.rapid.at({kTargets.front(), seed}).config);
    std::vector<std::vector<SeedPoint>> interior;
    for (double target : kTargets) {
      interior.emplace_back();
      for (auto seed : kSeeds) interior.back().push_back(s.rapid_falcon.at({target, seed}));
    }
    const auto e = endpoints_for(configs);
    check_interior(v, "rapid_fatigue", build_curve("falcon", "rapid_fatigue", interior, e.human, e.ai));
  }
  {
    // Validity only: the normal-regime policies evaluated zero-shot.
    std::vector<cli::RunConfig> configs;
    std::vector<SeedPoint> falcon;
    for (const auto& [seed, p] : s.normal) {
      auto c = p.config;
      c.fatigue.preset = "sustained_high";
      configs.push_back(c);
      FalconDeferrer f(net, p.params);
      falcon.push_back(evaluate_deferrer(f, test_env_for(c), kTestEpisodes));
    }
    const auto e = endpoints_for(configs);
    const std::vector<std::vector<SeedPoint>> interior = {falcon};
    try {
      const auto curve = build_curve("falcon", "sustained_high", interior, e.human, e.ai);
      curve.validate();
      note(v, fmt::format("sustained_high: valid, AUACC {:.4f}", auacc(curve)));
    } catch (const std::exception& ex) {
      fail(v, fmt::format("sustained_high curve invalid: {}", ex.what()));
    }
  }
  return v;
}

Verdict zero_shot_protocol(Suite& s) {
  Verdict v;
  auto config = training_config("normal_fatigue", {0.55, 0.65}, 11, s.root / "c11_broad");
  config.fatigue.preset = "cifar";  // widest published ranges
  config.train.iterations = 40;
  train_policy(config);
  const fs::path ckpt = config.out / "checkpoint.txt";
  const std::string bytes_before = ft::read_file(ckpt);
  const PolicyParams params = load_checkpoint(ckpt);
  const auto hash_before = params.hash();

  std::vector<RegimePreset> presets;
  for (const char* name : {"sustained_high", "normal_fatigue", "rapid_fatigue"}) presets.push_back(regime(name));
  SuiteConfig suite;
  suite.source = cli::load_test_task(config);
  suite.episode_length = config.episode_length;
  suite.test_episodes = kTestEpisodes;
  suite.test_seeds = {0};
  const PolicyNet net(params.config);

  const auto t0 = Clock::now();
  const auto results = run_regime_suite(net, params, presets, SuiteMode::ZeroShot, suite);
  const double secs = seconds_since(t0);

  if (params.hash() != hash_before) fail(v, "parameter hash changed");
  if (ft::read_file(ckpt) != bytes_before) fail(v, "checkpoint file changed");
  if (results.size() != presets.size()) fail(v, "missing regime results");
  for (const auto& r : results) note(v, fmt::format("{} AUACC {:.4f}", r.regime, r.auacc));
  within_time(v, secs, 60.0);
  return v;
}

Verdict reproducibility(Suite& s) {
  Verdict v;
  const auto& first = s.normal.at(0).config;
  auto again = first;
  again.out = s.root / "c12_repeat";
  train_policy(again);
  for (const char* file : {"train_log.csv", "checkpoint.txt"}) {
    const auto a = ft::read_file(first.out / file);
    const auto b = ft::read_file(again.out / file);
    if (a.empty() || a != b) fail(v, fmt::format("{} differs", file));
    else note(v, fmt::format("{} identical ({} bytes)", file, a.size()));
  }
  return v;
}

std::set<int> selected_criteria() {
  std::set<int> out;
  const char* env = std::getenv("FALCON_ACCEPTANCE_ONLY");
  if (!env || !*env) {
    for (int i = 1; i <= 12; ++i) out.insert(i);
    return out;
  }
  std::stringstream in(env);
  std::string item;
  while (std::getline(in, item, ',')) out.insert(std::stoi(item));
  // The later behavioural checks reuse earlier training runs.
  if (out.count(9)) out.insert({7, 8});
  if (out.count(12)) out.insert(7);
  return out;
}

}  // namespace

int main() {
  const auto chosen = selected_criteria();
  const bool keep = std::getenv("FALCON_ACCEPTANCE_KEEP") != nullptr;
  std::unique_ptr<ft::TempDir> scratch;
  Suite suite;
  if (keep) {
    suite.root = fs::current_path() / "acceptance_runs";
    fs::create_directories(suite.root);
  } else {
    scratch = std::make_unique<ft::TempDir>("acceptance");
    suite.root = scratch->path();
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"fatigue curve exactness", fatigue_exactness},
      {"human noise fidelity", human_noise},
      {"transition exactness", transition_exactness},
      {"loss gradient correctness", gradient_correctness},
      {"GAE oracle equivalence", gae_oracle},
      {"multiplier arithmetic", multiplier_arithmetic},
      {"constraint satisfaction", [&] { return constraint_satisfaction(suite); }},
      {"accuracy-coverage ordering", [&] { return ordering_reproduction(suite); }},
      {"interior dominance", [&] { return remark_reproduction(suite); }},
      {"AUACC exactness", auacc_exactness},
      {"zero-shot protocol", [&] { return zero_shot_protocol(suite); }},
      {"reproducibility", [&] { return reproducibility(suite); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!chosen.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = fmt::format("exception: {}", e.what());
    }
    failures += !v.pass;
    std::cout << fmt::format("{} {:2d} {}: {}", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
