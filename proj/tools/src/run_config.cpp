#include "falcon/cli/run_config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "falcon/errors.hpp"
#include "falcon/presets.hpp"

namespace falcon::cli {

namespace {

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed so leftovers can be
// reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError(field(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        throw ConfigError(field(key) + ": expected a nonnegative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError(field(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void read(const std::string& key, std::vector<T>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array()) throw ConfigError(field(key) + ": expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string at = fmt::format("{}[{}]", field(key), i);
        if constexpr (std::is_same_v<T, double>) {
          if (!e.is_number()) throw ConfigError(at + ": expected a number");
        } else {
          if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() >= 0)) {
            throw ConfigError(at + ": expected a nonnegative integer");
          }
        }
        out.push_back(e.get<T>());
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

void RunConfig::validate() const {
  if (task.kind == TaskConfig::Kind::Synthetic) {
    try {
      task.synthetic.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("task: ") + e.what());
    }
  } else {
    check(!task.path.empty(), "task.path", "required for file tasks");
    check(task.class_count >= 2, "task.class_count", "must be >= 2");
  }
  check(episode_length >= 1, "episode_length", "must be >= 1");
  try {
    network.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("network.") + e.what());
  }
  try {
    train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("train.") + e.what());
  }
  check(checkpoint_every >= 0, "checkpoint_every", "must be >= 0");
  check(eval.test_episodes >= 1, "eval.test_episodes", "must be >= 1");
  check(!eval.test_seeds.empty(), "eval.test_seeds", "must not be empty");
  check(eval.mode == "zero_shot" || eval.mode == "fine_tuned", "eval.mode", "must be zero_shot or fine_tuned");
  for (std::size_t i = 0; i < sweep.targets.size(); ++i) {
    const double t = sweep.targets[i];
    check(t > 0.0 && t < 1.0, fmt::format("sweep.targets[{}]", i), "must lie in (0, 1)");
  }
  check(sweep.band_width > 0.0 && sweep.band_width <= 1.0, "sweep.band_width", "must lie in (0, 1]");
  check(genbench.episodes >= 0, "genbench.episodes", "must be >= 0");
  check(workers >= 1, "workers", "must be >= 1");
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  ObjectReader root(j, "");

  if (const json* t = root.get("task")) {
    ObjectReader r(*t, "task");
    std::string kind = "synthetic";
    r.read("kind", kind);
    if (kind == "synthetic") {
      c.task.kind = TaskConfig::Kind::Synthetic;
      r.read("class_count", c.task.synthetic.class_count);
      r.read("feature_dim", c.task.synthetic.feature_dim);
      r.read("ai_accuracy", c.task.synthetic.ai_accuracy);
      r.read("difficulty_coupling", c.task.synthetic.difficulty_coupling);
      r.read("snr", c.task.synthetic.snr);
      r.read("noise_std", c.task.synthetic.noise_std);
      r.read("pool_size", c.task.synthetic.length);
      r.read("seed", c.task.seed);
      r.read("test_seed", c.task.test_seed);
    } else if (kind == "file") {
      c.task.kind = TaskConfig::Kind::File;
      std::string path;
      r.read("path", path);
      if (!path.empty()) c.task.path = resolve(base_dir, path);
      std::string test_path;
      r.read("test_path", test_path);
      if (!test_path.empty()) c.task.test_path = resolve(base_dir, test_path);
      r.read("class_count", c.task.class_count);
    } else {
      throw ConfigError("task.kind: must be 'synthetic' or 'file'");
    }
    r.finish();
  }

  if (const json* f = root.get("fatigue")) {
    ObjectReader r(*f, "fatigue");
    r.read("preset", c.fatigue.preset);
    std::string file;
    r.read("preset_file", file);
    if (!file.empty()) c.fatigue.preset_file = resolve(base_dir, file);
    if (const json* ranges = r.get("ranges")) {
      try {
        c.fatigue.ranges = ranges_from_json("inline", *ranges);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("fatigue.ranges: ") + e.what());
      }
    }
    r.finish();
  }

  root.read("episode_length", c.episode_length);

  if (const json* n = root.get("network")) {
    ObjectReader r(*n, "network");
    r.read("encoder_dim", c.network.encoder_dim);
    r.read("workload_embed_dim", c.network.workload_embed_dim);
    r.read("hidden_dim", c.network.hidden_dim);
    r.read("head_dim", c.network.head_dim);
    r.finish();
  }

  if (const json* t = root.get("train")) {
    ObjectReader r(*t, "train");
    auto& tc = c.train;
    r.read("clip_epsilon", tc.clip_epsilon);
    r.read("entropy_coef", tc.entropy_coef);
    r.read("lagrangian_lr", tc.lagrangian_lr);
    r.read("lagrangian_init", tc.lagrangian_init);
    std::string mode = "adam";
    r.read("multiplier_mode", mode);
    if (mode == "adam") {
      tc.multiplier_mode = MultiplierMode::Adam;
    } else if (mode == "plain") {
      tc.multiplier_mode = MultiplierMode::PlainGradient;
    } else {
      throw ConfigError("train.multiplier_mode: must be 'adam' or 'plain'");
    }
    r.read("freeze_multipliers", tc.freeze_multipliers);
    r.read("normalize_penalty", tc.normalize_penalty);
    r.read("gae_lambda", tc.gae_lambda);
    r.read("gamma", tc.gamma);
    r.read("gamma_cost", tc.gamma_cost);
    r.read("learning_rate", tc.learning_rate);
    r.read("lr_warmup_fraction", tc.lr_warmup_fraction);
    r.read("update_epochs", tc.update_epochs);
    r.read("value_weight", tc.value_weight);
    r.read("max_grad_norm", tc.max_grad_norm);
    r.read("episodes_per_iteration", tc.episodes_per_iteration);
    r.read("minibatch_episodes", tc.minibatch_episodes);
    r.read("iterations", tc.iterations);
    r.read("value_scale", tc.value_scale);
    r.finish();
  }

  if (const json* b = root.get("budget")) {
    ObjectReader r(*b, "budget");
    r.read("lower", c.train.budget.lower);
    r.read("upper", c.train.budget.upper);
    r.finish();
  }

  root.read("checkpoint_every", c.checkpoint_every);

  if (const json* e = root.get("eval")) {
    ObjectReader r(*e, "eval");
    r.read("test_episodes", c.eval.test_episodes);
    r.read("test_seeds", c.eval.test_seeds);
    r.read("regime", c.eval.regime);
    r.read("mode", c.eval.mode);
    r.finish();
  }

  if (const json* s = root.get("sweep")) {
    ObjectReader r(*s, "sweep");
    r.read("targets", c.sweep.targets);
    r.read("band_width", c.sweep.band_width);
    r.read("baselines", c.sweep.baselines);
    r.finish();
  }

  if (const json* g = root.get("genbench")) {
    ObjectReader r(*g, "genbench");
    r.read("preset", c.genbench.preset);
    r.read("episodes", c.genbench.episodes);
    r.finish();
  }

  root.read("seed", c.seed);
  root.read("workers", c.workers);
  std::string out;
  root.read("out", out);
  if (!out.empty()) c.out = resolve(base_dir, out);
  root.finish();

  c.train.seed = c.seed;
  c.train.workers = c.workers;
  c.validate();
  return c;
}

json run_config_to_json(const RunConfig& c) {
  json j;
  if (c.task.kind == TaskConfig::Kind::Synthetic) {
    const auto& s = c.task.synthetic;
    j["task"] = {{"kind", "synthetic"},    {"class_count", s.class_count},
                 {"feature_dim", s.feature_dim}, {"ai_accuracy", s.ai_accuracy},
                 {"difficulty_coupling", s.difficulty_coupling}, {"snr", s.snr},
                 {"noise_std", s.noise_std},    {"pool_size", s.length},
                 {"seed", c.task.seed},         {"test_seed", c.task.test_seed}};
  } else {
    j["task"] = {{"kind", "file"},
                 {"path", c.task.path.string()},
                 {"test_path", c.task.test_path.string()},
                 {"class_count", c.task.class_count}};
  }
  j["fatigue"] = {{"preset", c.fatigue.preset}};
  if (!c.fatigue.preset_file.empty()) j["fatigue"]["preset_file"] = c.fatigue.preset_file.string();
  if (c.fatigue.ranges) j["fatigue"]["ranges"] = ranges_to_json(*c.fatigue.ranges);
  j["episode_length"] = c.episode_length;
  j["network"] = {{"encoder_dim", c.network.encoder_dim},
                  {"workload_embed_dim", c.network.workload_embed_dim},
                  {"hidden_dim", c.network.hidden_dim},
                  {"head_dim", c.network.head_dim}};
  const auto& t = c.train;
  j["train"] = {{"clip_epsilon", t.clip_epsilon},
                {"entropy_coef", t.entropy_coef},
                {"lagrangian_lr", t.lagrangian_lr},
                {"lagrangian_init", t.lagrangian_init},
                {"multiplier_mode", t.multiplier_mode == MultiplierMode::Adam ? "adam" : "plain"},
                {"freeze_multipliers", t.freeze_multipliers},
                {"normalize_penalty", t.normalize_penalty},
                {"gae_lambda", t.gae_lambda},
                {"gamma", t.gamma},
                {"gamma_cost", t.gamma_cost},
                {"learning_rate", t.learning_rate},
                {"lr_warmup_fraction", t.lr_warmup_fraction},
                {"update_epochs", t.update_epochs},
                {"value_weight", t.value_weight},
                {"max_grad_norm", t.max_grad_norm},
                {"episodes_per_iteration", t.episodes_per_iteration},
                {"minibatch_episodes", t.minibatch_episodes},
                {"iterations", t.iterations},
                {"value_scale", t.value_scale}};
  j["budget"] = {{"lower", t.budget.lower}, {"upper", t.budget.upper}};
  j["checkpoint_every"] = c.checkpoint_every;
  j["eval"] = {{"test_episodes", c.eval.test_episodes},
               {"test_seeds", c.eval.test_seeds},
               {"regime", c.eval.regime},
               {"mode", c.eval.mode}};
  j["sweep"] = {{"targets", c.sweep.targets}, {"band_width", c.sweep.band_width}, {"baselines", c.sweep.baselines}};
  j["genbench"] = {{"preset", c.genbench.preset}, {"episodes", c.genbench.episodes}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out.string();
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

FatigueSource resolve_fatigue(const RunConfig& config) {
  if (config.fatigue.ranges) return *config.fatigue.ranges;
  if (!config.fatigue.preset_file.empty()) {
    const auto extra = load_presets(config.fatigue.preset_file);
    if (auto it = extra.find(config.fatigue.preset); it != extra.end()) return it->second;
  }
  return preset(config.fatigue.preset);
}

SharedStream load_task(const RunConfig& config) {
  if (config.task.kind == TaskConfig::Kind::Synthetic) {
    return make_synthetic_stream(config.task.synthetic, config.task.seed);
  }
  if (!std::filesystem::exists(config.task.path)) {
    throw DataError("instance file not found: " + config.task.path.string());
  }
  return load_instance_stream(config.task.path, StreamFormat{',', config.task.class_count});
}

SharedStream load_test_task(const RunConfig& config) {
  if (config.task.kind == TaskConfig::Kind::Synthetic) {
    return make_synthetic_stream(config.task.synthetic, config.task.test_seed);
  }
  if (config.task.test_path.empty()) return load_task(config);
  if (!std::filesystem::exists(config.task.test_path)) {
    throw DataError("instance file not found: " + config.task.test_path.string());
  }
  return load_instance_stream(config.task.test_path, StreamFormat{',', config.task.class_count});
}

EpisodeConfig make_episode_config(const RunConfig& config, SharedStream source) {
  EpisodeConfig env;
  env.length = config.episode_length;
  env.fatigue = resolve_fatigue(config);
  env.source = std::move(source);
  env.seed = config.seed;
  env.validate();
  return env;
}

}  // namespace falcon::cli
