#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace falcon {

/// Named rows x cols block inside a flat parameter vector (column-major).
struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * cols; }
  bool operator==(const ParamBlock&) const = default;
};

class ParamLayout {
 public:
  /// Appends a block at the current end of the vector.
  const ParamBlock& add(std::string name, int rows, int cols);

  const ParamBlock& find(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  std::size_t total_size() const noexcept { return total_; }

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

}  // namespace falcon
