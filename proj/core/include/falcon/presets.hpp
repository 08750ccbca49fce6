#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "falcon/fatigue.hpp"

namespace falcon {

/// Built-in fatigue presets. Benchmark tables: "cifar" (L=200), "chaoyang",
/// "flickr", "micebone" (L=100). Regimes: "sustained_high", "normal_fatigue",
/// "rapid_fatigue", "real_human_recall" (L=100, fixed tuples).
const std::map<std::string, FatigueParamRanges, std::less<>>& builtin_presets();

/// Looks up a built-in preset; ConfigError listing the valid names otherwise.
const FatigueParamRanges& preset(std::string_view name);

std::vector<std::string> preset_names();

// Preset files are JSON: {"presets": {"name": {"w0": [lo, hi], "w_peak": [...],
// "w_base": [...], "rho_hat": [...], "rho_bar": [...], "k": [...],
// "horizon_l": L}}}.
FatigueParamRanges ranges_from_json(const std::string& name, const nlohmann::json& j);
nlohmann::json ranges_to_json(const FatigueParamRanges& r);

std::map<std::string, FatigueParamRanges, std::less<>> load_presets(const std::filesystem::path& path);
void save_presets(const std::filesystem::path& path,
                  const std::map<std::string, FatigueParamRanges, std::less<>>& presets);

nlohmann::json params_to_json(const FatigueParams& p);
/// Per-episode parameter table: `episode,w0,w_peak,w_base,rho_hat,rho_bar,k,horizon_l`.
struct EpisodeFatigue {
  std::uint64_t episode = 0;
  FatigueParams params;
};
void save_fatigue_table(const std::filesystem::path& path, const std::vector<EpisodeFatigue>& rows);
std::vector<EpisodeFatigue> load_fatigue_table(const std::filesystem::path& path);

FatigueParams params_from_json(const nlohmann::json& j);

}  // namespace falcon
