#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "falcon/actors.hpp"
#include "falcon/errors.hpp"

namespace falcon {

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view cell, std::size_t row, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("cannot parse '" + std::string(cell) + "' in column " + std::string(column), row);
  }
  return value;
}

}  // namespace

SharedStream load_instance_stream(const std::filesystem::path& path, const StreamFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open instance file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header in " + path.string(), 1);
  auto header = split(trim(line), format.delimiter);
  for (auto& h : header) h = trim(h);
  if (header.size() < 3 || header[0] != "instance_id" || header[1] != "label" || header[2] != "ai_prediction") {
    throw ParseError("header must start with instance_id,label,ai_prediction", 1);
  }
  const bool has_conf = header.size() > 3 && header[3] == "ai_confidence";
  const std::size_t first_feature = has_conf ? 4 : 3;
  const std::size_t width = header.size() - first_feature;

  std::vector<TaskInstance> instances;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    auto body = trim(line);
    if (body.empty()) continue;
    auto cells = split(body, format.delimiter);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row);
    }
    TaskInstance inst;
    inst.instance_id = std::string(trim(cells[0]));
    inst.label = parse_number<int>(trim(cells[1]), row, "label");
    if (auto c = trim(cells[2]); !c.empty()) inst.ai_prediction = parse_number<int>(c, row, "ai_prediction");
    if (has_conf) {
      if (auto c = trim(cells[3]); !c.empty()) inst.ai_confidence = parse_number<double>(c, row, "ai_confidence");
    }
    inst.features.reserve(width);
    for (std::size_t j = first_feature; j < cells.size(); ++j) {
      inst.features.push_back(parse_number<double>(trim(cells[j]), row, header[j]));
    }
    instances.push_back(std::move(inst));
  }
  return std::make_shared<const InstanceStream>(std::move(instances), format.class_count);
}

void save_instance_stream(const std::filesystem::path& path, const InstanceStream& stream, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write instance file: " + path.string());
  const bool conf = std::any_of(stream.instances().begin(), stream.instances().end(),
                                [](const TaskInstance& i) { return i.ai_confidence.has_value(); });
  std::string line = fmt::format("instance_id{0}label{0}ai_prediction", delimiter);
  if (conf) line += fmt::format("{}ai_confidence", delimiter);
  for (int j = 0; j < stream.feature_dim(); ++j) line += fmt::format("{}f{}", delimiter, j);
  out << line << '\n';
  for (const auto& inst : stream.instances()) {
    line = fmt::format("{1}{0}{2}{0}", delimiter, inst.instance_id, inst.label);
    if (inst.ai_prediction) line += std::to_string(*inst.ai_prediction);
    if (conf) {
      line += delimiter;
      if (inst.ai_confidence) line += fmt::format("{}", *inst.ai_confidence);
    }
    for (double f : inst.features) line += fmt::format("{}{}", delimiter, f);
    out << line << '\n';
  }
}

}  // namespace falcon
