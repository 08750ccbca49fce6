#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace falcon {

using Rng = std::mt19937_64;

// Independent stream for (seed, tag...). std::seed_seq's mixing is fixed by the
// standard, so derived streams are stable across platforms and worker counts.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * tags.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Stream tags. Keeping them named avoids accidental stream reuse.
namespace stream {
inline constexpr std::uint64_t kInstances = 0x1001;
inline constexpr std::uint64_t kFatigue = 0x1002;
inline constexpr std::uint64_t kHuman = 0x1003;
inline constexpr std::uint64_t kPolicy = 0x1004;
inline constexpr std::uint64_t kShuffle = 0x1005;
inline constexpr std::uint64_t kInit = 0x1006;
inline constexpr std::uint64_t kBaseline = 0x1007;
inline constexpr std::uint64_t kDataset = 0x1008;
}  // namespace stream

/// Uniform in [0, 1) using the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace falcon
