#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "falcon/errors.hpp"
#include "falcon/policy_net.hpp"

namespace falcon {

std::string serialize_checkpoint(const PolicyParams& params) {
  const auto& c = params.config;
  std::string out = fmt::format("falcon-checkpoint {}\nconfig {} {} {} {} {}\nblocks {}\n", kCheckpointVersion,
                                c.feature_dim, c.encoder_dim, c.workload_embed_dim, c.hidden_dim, c.head_dim,
                                params.layout.blocks().size());
  for (const auto& b : params.layout.blocks()) out += fmt::format("{} {} {} {}\n", b.name, b.rows, b.cols, b.offset);
  out += fmt::format("values {}\n", params.values.size());
  for (Eigen::Index i = 0; i < params.values.size(); ++i) out += fmt::format("{:a}\n", params.values[i]);
  return out;
}

PolicyParams parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "falcon-checkpoint") throw DataError("not a falcon checkpoint");
  if (version != kCheckpointVersion) {
    throw DataError(fmt::format("checkpoint version mismatch: expected {}, found {}", kCheckpointVersion, version));
  }
  PolicyParams p;
  auto& c = p.config;
  if (!(in >> tag >> c.feature_dim >> c.encoder_dim >> c.workload_embed_dim >> c.hidden_dim >> c.head_dim) ||
      tag != "config") {
    throw DataError("checkpoint: malformed config line");
  }
  std::size_t n_blocks = 0;
  if (!(in >> tag >> n_blocks) || tag != "blocks") throw DataError("checkpoint: malformed blocks line");
  for (std::size_t i = 0; i < n_blocks; ++i) {
    std::string name;
    int rows = 0, cols = 0;
    std::size_t offset = 0;
    if (!(in >> name >> rows >> cols >> offset)) throw DataError("checkpoint: truncated manifest");
    const auto& b = p.layout.add(name, rows, cols);
    if (b.offset != offset) throw DataError("checkpoint: manifest offsets are not contiguous at " + name);
  }
  if (!(p.layout == make_layout(c))) throw DataError("checkpoint: manifest does not match the network config");
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "values") throw DataError("checkpoint: malformed values line");
  if (count != p.layout.total_size()) throw DataError("checkpoint: value count does not match manifest");
  p.values.resize(static_cast<Eigen::Index>(count));
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token)) throw DataError("checkpoint: truncated value array");
    char* end = nullptr;
    p.values[static_cast<Eigen::Index>(i)] = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) throw DataError("checkpoint: bad value '" + token + "'");
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  // Write-then-rename so an interrupted save never clobbers the previous file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out << serialize_checkpoint(params);
  }
  std::filesystem::rename(tmp, path);
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace falcon
