#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace falcon::testing {

FatigueParams constant_fatigue(double w, int horizon_l) {
  return {.w0 = w, .w_peak = w, .w_base = w, .rho_hat = 0.05, .rho_bar = 0.375, .k = 0.1, .horizon_l = horizon_l};
}

FatigueParams example_one() {
  return {.w0 = 0.9, .w_peak = 1.0, .w_base = 0.7, .rho_hat = 0.05, .rho_bar = 0.375, .k = 0.1, .horizon_l = 200};
}

SyntheticTaskSpec standard_task(std::size_t length) {
  SyntheticTaskSpec spec;
  spec.class_count = 10;
  spec.feature_dim = 8;
  spec.ai_accuracy = 0.65;
  spec.length = length;
  return spec;
}

SharedStream standard_stream(std::size_t length, std::uint64_t seed) {
  return make_synthetic_stream(standard_task(length), seed);
}

EpisodeConfig make_env(SharedStream source, FatigueSource fatigue, int length, std::uint64_t seed) {
  EpisodeConfig env;
  env.length = length;
  env.fatigue = std::move(fatigue);
  env.source = std::move(source);
  env.seed = seed;
  return env;
}

NetConfig tiny_net(int feature_dim) {
  return {.feature_dim = feature_dim, .encoder_dim = 6, .workload_embed_dim = 3, .hidden_dim = 8, .head_dim = 8};
}

LossFixture make_loss_fixture(const PolicyNet& net, const PolicyParams& behaviour, const EpisodeConfig& env,
                              int episodes, const TrainConfig& config) {
  LossFixture fx;
  const double scale = config.value_scale > 0.0 ? config.value_scale : env.length;
  fx.trajectories = collect(net, behaviour, env, episodes, 0, config.seed, scale);
  fx.prepared = prepare_batch(fx.trajectories, config);
  for (const auto& p : fx.prepared) fx.batch.push_back(&p);
  return fx;
}

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  do {
    path_ = base / ("falcon_" + tag + "_" + std::to_string(rd()));
  } while (std::filesystem::exists(path_));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace falcon::testing
