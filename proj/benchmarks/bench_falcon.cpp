#include <benchmark/benchmark.h>

#include "falcon/actors.hpp"
#include "falcon/env.hpp"
#include "falcon/presets.hpp"
#include "falcon/policy_net.hpp"
#include "falcon/trainer.hpp"

using namespace falcon;

namespace {

EpisodeConfig bench_env(int length) {
  EpisodeConfig env;
  env.length = length;
  env.fatigue = preset("chaoyang");
  env.source = make_synthetic_stream(SyntheticTaskSpec{.length = 5000}, 7);
  env.seed = 1;
  return env;
}

void BM_NetForwardStep(benchmark::State& state) {
  const PolicyNet net(NetConfig{});
  const PolicyParams params = init_params(net.config(), 0);
  const std::vector<double> features(net.config().feature_dim, 0.1);
  RecurrentState hidden;
  for (auto _ : state) {
    NetOutput out = net.forward(params, Observation{features, 0.3}, hidden);
    hidden = std::move(out.next_hidden);
    benchmark::DoNotOptimize(out.action_logits);
  }
}
BENCHMARK(BM_NetForwardStep);

void BM_EnvEpisode(benchmark::State& state) {
  DeferralEnv env(bench_env(100));
  std::uint64_t episode = 0;
  for (auto _ : state) {
    env.reset(episode++);
    int t = 0;
    while (!env.terminal()) benchmark::DoNotOptimize(env.step(t++ % 3 ? Action::AI : Action::Human));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_EnvEpisode);

void BM_LossAndGradient(benchmark::State& state) {
  const PolicyNet net(NetConfig{});
  const PolicyParams params = init_params(net.config(), 0);
  const auto env = bench_env(100);
  TrainConfig tc;
  const auto trajs = collect(net, params, env, static_cast<int>(state.range(0)), 0, 0, env.length);
  const auto prepared = prepare_batch(trajs, tc);
  std::vector<const PreparedEpisode*> batch;
  for (const auto& p : prepared) batch.push_back(&p);
  Eigen::VectorXd grad(params.values.size());
  for (auto _ : state) {
    grad.setZero();
    benchmark::DoNotOptimize(ppo_losses(net, params, batch, Multipliers{}, tc, env.length, &grad));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}
BENCHMARK(BM_LossAndGradient)->Arg(4)->Arg(16);

void BM_TrainIteration(benchmark::State& state) {
  const PolicyNet net(NetConfig{});
  const auto env = bench_env(100);
  TrainConfig tc;
  tc.iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(tc, env, net, init_params(net.config(), 0)));
}
BENCHMARK(BM_TrainIteration)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
