#include "falcon/presets.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "falcon/errors.hpp"

namespace falcon {

namespace {

FatigueParamRanges table(std::string name, Interval w0, Interval w_base, Interval w_peak,
                         Interval rho_hat, Interval rho_bar, Interval k, int horizon) {
  FatigueParamRanges r;
  r.name = std::move(name);
  r.w0 = w0;
  r.w_base = w_base;
  r.w_peak = w_peak;
  r.rho_hat = rho_hat;
  r.rho_bar = rho_bar;
  r.k = k;
  r.horizon_l = horizon;
  return r;
}

FatigueParamRanges fixed(std::string name, double w0, double w_peak, double w_base, double rho_hat,
                         double rho_bar, double k) {
  return FatigueParamRanges::point(
      std::move(name), FatigueParams{w0, w_peak, w_base, rho_hat, rho_bar, k, 100});
}

std::map<std::string, FatigueParamRanges, std::less<>> make_builtin() {
  std::map<std::string, FatigueParamRanges, std::less<>> m;
  auto add = [&m](FatigueParamRanges r) {
    r.validate();
    auto key = r.name;
    m.emplace(std::move(key), std::move(r));
  };
  // Published per-dataset ranges: w0, w_base, w_peak, rho_hat, rho_bar, k.
  add(table("cifar", {0.7, 0.9}, {0.4, 0.5}, {0.8, 1.0}, {0.025, 0.1}, {0.25, 0.5}, {0.05, 0.1}, 200));
  add(table("chaoyang", {0.8, 0.9}, {0.6, 0.7}, {0.9, 1.0}, {0.025, 0.1}, {0.25, 0.5}, {0.05, 0.1}, 100));
  add(table("flickr", {0.65, 0.9}, {0.3, 0.4}, {0.8, 1.0}, {0.025, 0.1}, {0.25, 0.5}, {0.05, 0.1}, 100));
  add(table("micebone", {0.8, 0.9}, {0.6, 0.7}, {0.9, 1.0}, {0.025, 0.1}, {0.25, 0.5}, {0.05, 0.1}, 100));

  // Regimes. Sustained stays above 0.85; normal peaks near 40 deferrals and
  // decays gradually; rapid falls from 0.95 to ~0.36 by deferral 50.
  add(fixed("sustained_high", 0.90, 0.95, 0.85, 0.10, 0.80, 0.10));
  add(fixed("normal_fatigue", 0.75, 0.95, 0.55, 0.40, 0.75, 0.12));
  add(fixed("rapid_fatigue", 0.92, 0.95, 0.35, 0.05, 0.30, 0.20));
  // Recall 0.78 with no warm-up, settling at 0.66 after ~100 readings.
  add(fixed("real_human_recall", 0.78, 0.78, 0.66, 0.01, 0.50, 0.10));
  return m;
}

Interval interval_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(path + ": expected [lo, hi]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

const std::map<std::string, FatigueParamRanges, std::less<>>& builtin_presets() {
  static const auto presets = make_builtin();
  return presets;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : builtin_presets()) names.push_back(name);
  return names;
}

const FatigueParamRanges& preset(std::string_view name) {
  const auto& m = builtin_presets();
  if (auto it = m.find(name); it != m.end()) return it->second;
  std::string valid;
  for (const auto& [n, _] : m) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown fatigue preset '" + std::string(name) + "' (valid: " + valid + ")");
}

FatigueParamRanges ranges_from_json(const std::string& name, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("presets." + name + ": expected an object");
  const std::string base = "presets." + name + ".";
  auto field = [&](const char* key) {
    if (!j.contains(key)) throw ConfigError(base + key + ": missing");
    return interval_from_json(j.at(key), base + key);
  };
  FatigueParamRanges r;
  r.name = name;
  r.w0 = field("w0");
  r.w_peak = field("w_peak");
  r.w_base = field("w_base");
  r.rho_hat = field("rho_hat");
  r.rho_bar = field("rho_bar");
  r.k = field("k");
  if (!j.contains("horizon_l") || !j.at("horizon_l").is_number_integer()) {
    throw ConfigError(base + "horizon_l: expected an integer");
  }
  r.horizon_l = j.at("horizon_l").get<int>();
  r.validate();
  return r;
}

nlohmann::json ranges_to_json(const FatigueParamRanges& r) {
  auto iv = [](const Interval& i) { return nlohmann::json::array({i.lo, i.hi}); };
  return {{"w0", iv(r.w0)},           {"w_peak", iv(r.w_peak)}, {"w_base", iv(r.w_base)},
          {"rho_hat", iv(r.rho_hat)}, {"rho_bar", iv(r.rho_bar)}, {"k", iv(r.k)},
          {"horizon_l", r.horizon_l}};
}

std::map<std::string, FatigueParamRanges, std::less<>> load_presets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open preset file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.contains("presets") || !j.at("presets").is_object()) {
    throw ConfigError(path.string() + ": missing 'presets' object");
  }
  std::map<std::string, FatigueParamRanges, std::less<>> out;
  for (const auto& [name, body] : j.at("presets").items()) out.emplace(name, ranges_from_json(name, body));
  return out;
}

void save_presets(const std::filesystem::path& path,
                  const std::map<std::string, FatigueParamRanges, std::less<>>& presets) {
  nlohmann::json j;
  j["presets"] = nlohmann::json::object();
  for (const auto& [name, r] : presets) j["presets"][name] = ranges_to_json(r);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write preset file: " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json params_to_json(const FatigueParams& p) {
  return {{"w0", p.w0},           {"w_peak", p.w_peak}, {"w_base", p.w_base}, {"rho_hat", p.rho_hat},
          {"rho_bar", p.rho_bar}, {"k", p.k},           {"horizon_l", p.horizon_l}};
}

FatigueParams params_from_json(const nlohmann::json& j) {
  FatigueParams p;
  try {
    p.w0 = j.at("w0").get<double>();
    p.w_peak = j.at("w_peak").get<double>();
    p.w_base = j.at("w_base").get<double>();
    p.rho_hat = j.at("rho_hat").get<double>();
    p.rho_bar = j.at("rho_bar").get<double>();
    p.k = j.at("k").get<double>();
    p.horizon_l = j.at("horizon_l").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fatigue params: ") + e.what());
  }
  p.validate();
  return p;
}

namespace {

constexpr const char* kFatigueTableHeader = "episode,w0,w_peak,w_base,rho_hat,rho_bar,k,horizon_l";

template <typename T>
T parse_cell(const std::string& cell, std::size_t row) {
  T v{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw ParseError("bad value '" + cell + "'", row);
  return v;
}

}  // namespace

void save_fatigue_table(const std::filesystem::path& path, const std::vector<EpisodeFatigue>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << kFatigueTableHeader << '\n';
  for (const auto& r : rows) {
    const auto& p = r.params;
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.episode, p.w0, p.w_peak, p.w_base, p.rho_hat, p.rho_bar, p.k,
                       p.horizon_l);
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<EpisodeFatigue> load_fatigue_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kFatigueTableHeader) {
    throw SchemaError(path.string() + ": header must be '" + kFatigueTableHeader + "'");
  }
  std::vector<EpisodeFatigue> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 8) throw ParseError("expected 8 columns", row);
    EpisodeFatigue r;
    r.episode = parse_cell<std::uint64_t>(cells[0], row);
    r.params.w0 = parse_cell<double>(cells[1], row);
    r.params.w_peak = parse_cell<double>(cells[2], row);
    r.params.w_base = parse_cell<double>(cells[3], row);
    r.params.rho_hat = parse_cell<double>(cells[4], row);
    r.params.rho_bar = parse_cell<double>(cells[5], row);
    r.params.k = parse_cell<double>(cells[6], row);
    r.params.horizon_l = parse_cell<int>(cells[7], row);
    if (!r.params.is_valid()) throw SchemaError(fmt::format("invalid fatigue parameters (row {})", row));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace falcon
