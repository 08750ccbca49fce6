#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "falcon/actors.hpp"
#include "falcon/env.hpp"
#include "falcon/fatigue.hpp"
#include "falcon/policy_net.hpp"
#include "falcon/trainer.hpp"

namespace falcon::testing {

/// Expert whose performance is `w` at every workload.
FatigueParams constant_fatigue(double w, int horizon_l = 100);

/// Fig. 2a's first example curve.
FatigueParams example_one();

/// K = 10, d = 8, AI accuracy 0.65.
SyntheticTaskSpec standard_task(std::size_t length = 5000);
SharedStream standard_stream(std::size_t length = 5000, std::uint64_t seed = 7);

EpisodeConfig make_env(SharedStream source, FatigueSource fatigue, int length, std::uint64_t seed = 0);

/// Hidden 8, feature dim 4, small heads.
NetConfig tiny_net(int feature_dim = 4);

/// Trajectories from `behaviour` and the matching prepared batch. The caller
/// keeps `trajectories` alive while the prepared episodes are in use.
struct LossFixture {
  std::vector<Trajectory> trajectories;
  std::vector<PreparedEpisode> prepared;
  std::vector<const PreparedEpisode*> batch;
};
LossFixture make_loss_fixture(const PolicyNet& net, const PolicyParams& behaviour, const EpisodeConfig& env,
                              int episodes, const TrainConfig& config);

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace falcon::testing
