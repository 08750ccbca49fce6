#include "falcon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "falcon/errors.hpp"

namespace falcon {

namespace {

constexpr double kCoverageTol = 1e-12;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + text + "'", row);
  }
}

}  // namespace

FalconDeferrer::FalconDeferrer(const PolicyNet& net, const PolicyParams& params) : net_(net), params_(params) {
  if (!(params.config == net.config())) throw ConfigError("checkpoint does not match the network shape");
}

void FalconDeferrer::begin_episode(std::uint64_t) { hidden_ = RecurrentState{}; }

Action FalconDeferrer::act(const EnvState& state, const TaskInstance&) {
  NetOutput out = net_.forward(params_, Observation{state.features, state.workload_fraction}, hidden_);
  hidden_ = std::move(out.next_hidden);
  return greedy_action(out.action_logits);
}

EpisodeResult run_episode_greedy(Deferrer& deferrer, DeferralEnv& env, std::uint64_t episode_index,
                                 Trajectory* record) {
  EnvState state = env.reset(episode_index);
  deferrer.begin_episode(episode_index);
  if (record) {
    *record = Trajectory{};
    record->seed = env.config().seed;
    record->episode_index = episode_index;
    record->fatigue = env.fatigue();
    record->feature_dim = env.feature_dim();
  }
  long reward = 0;
  while (true) {
    const Action action = deferrer.act(state, env.current_instance());
    const StepOutcome out = env.step(action);
    reward += out.reward;
    if (record) record_step(*record, state, action, out);
    if (out.terminal()) break;
    state = *out.next_state;
  }
  const double T = env.length();
  return {static_cast<double>(reward) / T, 1.0 - static_cast<double>(env.workload()) / T};
}

std::uint64_t test_stream_seed(std::uint64_t test_seed) { return test_seed ^ 0x7e57'0000'0000'0000ULL; }

SeedPoint evaluate_deferrer(Deferrer& deferrer, const EpisodeConfig& env_config, int n_episodes,
                            std::uint64_t first_episode) {
  if (n_episodes < 1) throw ConfigError("evaluation needs at least one episode");
  DeferralEnv env(env_config);
  SeedPoint p;
  for (int i = 0; i < n_episodes; ++i) {
    const auto r = run_episode_greedy(deferrer, env, first_episode + static_cast<std::uint64_t>(i));
    p.accuracy += r.accuracy;
    p.coverage += r.coverage;
  }
  p.accuracy /= n_episodes;
  p.coverage /= n_episodes;
  return p;
}

SeedPoint evaluate_at_coverage(const CoverageKnob& make, const EpisodeConfig& env, int n_episodes, double target,
                               int bisection_steps) {
  if (!(target >= 0.0 && target <= 1.0)) throw ConfigError("coverage target outside [0, 1]");
  auto at = [&](double knob) {
    auto d = make(knob);
    return evaluate_deferrer(*d, env, n_episodes);
  };
  double k_lo = 0.0, k_hi = 1.0;
  SeedPoint lo = at(k_lo), hi = at(k_hi);
  if (target <= lo.coverage) return lo;
  if (target >= hi.coverage) return hi;
  for (int i = 0; i < bisection_steps; ++i) {
    const double mid = 0.5 * (k_lo + k_hi);
    const SeedPoint p = at(mid);
    if (p.coverage == target) return p;
    if (p.coverage < target) {
      k_lo = mid;
      lo = p;
    } else {
      k_hi = mid;
      hi = p;
    }
  }
  const double w = (target - lo.coverage) / (hi.coverage - lo.coverage);
  return {target, lo.accuracy + w * (hi.accuracy - lo.accuracy)};
}

void CoverageCurve::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.coverage >= 0.0 && p.coverage <= 1.0 && p.accuracy >= 0.0 && p.accuracy <= 1.0)) {
      throw NumericError(fmt::format("curve {}/{}: point {} outside [0, 1]", method, regime, i));
    }
    if (i > 0 && !(p.coverage > points[i - 1].coverage)) {
      throw NumericError(fmt::format("curve {}/{}: coverages not strictly increasing at point {}", method, regime, i));
    }
  }
}

CurvePoint aggregate(std::span<const SeedPoint> per_seed) {
  if (per_seed.empty()) throw ConfigError("no results to aggregate");
  const double n = static_cast<double>(per_seed.size());
  CurvePoint c;
  for (const auto& s : per_seed) {
    c.coverage += s.coverage;
    c.accuracy += s.accuracy;
  }
  c.coverage /= n;
  c.accuracy /= n;
  if (per_seed.size() > 1) {
    double ss = 0.0;
    for (const auto& s : per_seed) ss += (s.accuracy - c.accuracy) * (s.accuracy - c.accuracy);
    c.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return c;
}

CoverageCurve build_curve(std::string method, std::string regime, std::span<const std::vector<SeedPoint>> interior,
                          std::span<const SeedPoint> human_only, std::span<const SeedPoint> ai_only) {
  if (human_only.empty() || ai_only.empty()) throw ConfigError("curve endpoints need at least one test episode set");
  CoverageCurve curve;
  curve.method = std::move(method);
  curve.regime = std::move(regime);

  CurvePoint lo = aggregate(human_only);
  CurvePoint hi = aggregate(ai_only);
  lo.coverage = 0.0;
  hi.coverage = 1.0;

  // (point, number merged into it)
  std::vector<std::pair<CurvePoint, int>> merged = {{lo, 1}, {hi, 1}};
  for (const auto& group : interior) {
    if (group.empty()) throw ConfigError("empty episode set for a curve point");
    const CurvePoint p = aggregate(group);
    auto same = std::find_if(merged.begin(), merged.end(), [&](const auto& m) {
      return std::abs(m.first.coverage - p.coverage) <= kCoverageTol;
    });
    if (same == merged.end()) {
      merged.emplace_back(p, 1);
      continue;
    }
    auto& [q, count] = *same;
    q.accuracy = (q.accuracy * count + p.accuracy) / (count + 1);
    q.std_error = std::sqrt((q.std_error * q.std_error * count * count + p.std_error * p.std_error)) / (count + 1);
    ++count;
  }
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first.coverage < b.first.coverage; });
  for (const auto& [p, count] : merged) curve.points.push_back(p);
  curve.validate();
  return curve;
}

double auacc(std::span<const CurvePoint> points) {
  if (points.size() < 2) throw IntegrationError("AUACC needs at least two points");
  if (std::abs(points.front().coverage) > kCoverageTol || std::abs(points.back().coverage - 1.0) > kCoverageTol) {
    throw IntegrationError("AUACC needs a curve spanning coverage 0 to 1");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dx = points[i].coverage - points[i - 1].coverage;
    if (dx < 0.0) throw IntegrationError("AUACC needs coverages in increasing order");
    area += 0.5 * dx * (points[i].accuracy + points[i - 1].accuracy);
  }
  return area;
}

double auacc(const CoverageCurve& curve) { return auacc(curve.points); }

void write_curves(std::ostream& out, std::span<const CoverageCurve> curves) {
  out << "method,regime,coverage,accuracy,std_error\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << fmt::format("{},{},{},{},{}\n", c.method, c.regime, p.coverage, p.accuracy, p.std_error);
    }
  }
}

std::vector<CoverageCurve> read_curves(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "method,regime,coverage,accuracy,std_error") {
    throw SchemaError("curve file must start with 'method,regime,coverage,accuracy,std_error'");
  }
  std::vector<CoverageCurve> curves;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw ParseError("expected 5 columns", row);
    if (curves.empty() || curves.back().method != cells[0] || curves.back().regime != cells[1]) {
      curves.push_back({cells[0], cells[1], {}, {}});
    }
    curves.back().points.push_back(
        {parse_double(cells[2], row), parse_double(cells[3], row), parse_double(cells[4], row)});
  }
  for (const auto& c : curves) c.validate();
  return curves;
}

void save_curves(const std::filesystem::path& path, std::span<const CoverageCurve> curves) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_curves(out, curves);
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<CoverageCurve> load_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return read_curves(in);
}

void write_auacc_summary(std::ostream& out, std::span<const AuaccRow> rows) {
  out << "method,regime,auacc\n";
  for (const auto& r : rows) out << fmt::format("{},{},{}\n", r.method, r.regime, r.auacc);
}

std::vector<AuaccRow> read_auacc_summary(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "method,regime,auacc") {
    throw SchemaError("AUACC summary must start with 'method,regime,auacc'");
  }
  std::vector<AuaccRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw ParseError("expected 3 columns", row);
    rows.push_back({cells[0], cells[1], parse_double(cells[2], row)});
  }
  return rows;
}

SuiteMode parse_suite_mode(std::string_view text) {
  if (text == "zero_shot") return SuiteMode::ZeroShot;
  if (text == "fine_tuned") return SuiteMode::FineTuned;
  throw ConfigError(fmt::format("unknown mode '{}' (valid: zero_shot, fine_tuned)", text));
}

std::string_view to_string(SuiteMode mode) { return mode == SuiteMode::ZeroShot ? "zero_shot" : "fine_tuned"; }

std::vector<RegimeResult> run_regime_suite(const PolicyNet& net, const PolicyParams& params,
                                           std::span<const RegimePreset> presets, SuiteMode mode,
                                           const SuiteConfig& config) {
  if (config.test_seeds.empty() || config.test_episodes < 1) throw ConfigError("empty episode set");
  std::vector<RegimeResult> results;
  for (const auto& preset : presets) {
    preset.check();
    EpisodeConfig env;
    env.length = config.episode_length;
    env.fatigue = preset.fatigue;
    env.source = config.source;

    PolicyParams tuned;
    const PolicyParams* policy = &params;
    if (mode == SuiteMode::FineTuned) {
      EpisodeConfig tune_env = env;
      if (config.fine_tune_source) tune_env.source = config.fine_tune_source;
      tune_env.seed = config.fine_tune.seed;
      tuned = train(config.fine_tune, tune_env, net, params).params;
      policy = &tuned;
    }

    std::vector<SeedPoint> falcon, human, ai;
    for (const auto seed : config.test_seeds) {
      env.seed = test_stream_seed(seed);
      FalconDeferrer f(net, *policy);
      HumanOnlyDeferrer h;
      AiOnlyDeferrer a;
      falcon.push_back(evaluate_deferrer(f, env, config.test_episodes));
      human.push_back(evaluate_deferrer(h, env, config.test_episodes));
      ai.push_back(evaluate_deferrer(a, env, config.test_episodes));
    }
    RegimeResult r;
    r.regime = preset.name;
    r.policy = aggregate(falcon);
    const std::vector<std::vector<SeedPoint>> interior = {falcon};
    r.curve = build_curve("falcon", preset.name, interior, human, ai);
    r.curve.seeds = config.test_seeds;
    r.auacc = auacc(r.curve);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace falcon
