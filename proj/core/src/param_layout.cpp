#include "falcon/param_layout.hpp"

#include <algorithm>

#include "falcon/errors.hpp"

namespace falcon {

const ParamBlock& ParamLayout::add(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ConfigError("parameter block '" + name + "' has an empty shape");
  if (contains(name)) throw ConfigError("duplicate parameter block '" + name + "'");
  blocks_.push_back({std::move(name), rows, cols, total_});
  total_ += blocks_.back().size();
  return blocks_.back();
}

const ParamBlock& ParamLayout::find(std::string_view name) const {
  auto it = std::find_if(blocks_.begin(), blocks_.end(), [&](const ParamBlock& b) { return b.name == name; });
  if (it == blocks_.end()) throw ConfigError("no parameter block named '" + std::string(name) + "'");
  return *it;
}

bool ParamLayout::contains(std::string_view name) const noexcept {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const ParamBlock& b) { return b.name == name; });
}

}  // namespace falcon
