#include <bit>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "falcon/env.hpp"
#include "falcon/errors.hpp"
#include "falcon/presets.hpp"
#include "fixtures.hpp"

using namespace falcon;
namespace ft = falcon::testing;

namespace {

Trajectory run_actions(DeferralEnv& env, std::uint64_t episode, const std::vector<Action>& actions) {
  Trajectory traj;
  traj.episode_index = episode;
  EnvState s = env.reset(episode);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const auto out = env.step(actions[t]);
    record_step(traj, s, actions[t], out);
    if (out.next_state) s = *out.next_state;
  }
  return traj;
}

}  // namespace

TEST(Reset, InitialState) {
  DeferralEnv env(ft::make_env(ft::standard_stream(500), preset("cifar"), 100));
  for (std::uint64_t e : {0ULL, 3ULL, 99ULL}) {
    const auto s = env.reset(e);
    EXPECT_EQ(s.workload, 0);
    EXPECT_EQ(s.step, 1);
    EXPECT_EQ(s.workload_fraction, 0.0);
    EXPECT_EQ(static_cast<int>(s.features.size()), 8);
  }
}

TEST(Reset, Deterministic) {
  const auto cfg = ft::make_env(ft::standard_stream(500), preset("cifar"), 100, 5);
  DeferralEnv a(cfg), b(cfg);
  const auto sa = a.reset(4);
  const auto sb = b.reset(4);
  EXPECT_EQ(a.fatigue(), b.fatigue());
  EXPECT_TRUE(std::equal(sa.features.begin(), sa.features.end(), sb.features.begin(), sb.features.end()));
  EXPECT_EQ(a.current_instance(), b.current_instance());
}

TEST(Reset, EpisodesDrawDistinctInstances) {
  DeferralEnv env(ft::make_env(ft::standard_stream(100), ft::example_one(), 100));
  env.reset(0);
  std::set<std::string> seen;
  while (!env.terminal()) {
    seen.insert(env.current_instance().instance_id);
    env.step(Action::AI);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(Reset, WorkloadResetsAcrossEpisodes) {
  DeferralEnv env(ft::make_env(ft::standard_stream(200), ft::example_one(), 20));
  run_actions(env, 0, std::vector<Action>(20, Action::Human));
  EXPECT_EQ(env.workload(), 20);
  EXPECT_EQ(env.reset(1).workload, 0);
}

TEST(Step, SingleStepEpisode) {
  DeferralEnv env(ft::make_env(ft::standard_stream(10), ft::example_one(), 1));
  env.reset(0);
  const auto out = env.step(Action::AI);
  EXPECT_TRUE(out.terminal());
  EXPECT_TRUE(env.terminal());
  EXPECT_THROW(env.step(Action::AI), LifecycleError);
}

TEST(Step, BeforeResetIsLifecycleError) {
  DeferralEnv env(ft::make_env(ft::standard_stream(10), ft::example_one(), 5));
  EXPECT_THROW(env.step(Action::AI), LifecycleError);
}

TEST(Step, AllAiAndAllHuman) {
  DeferralEnv env(ft::make_env(ft::standard_stream(500), preset("cifar"), 100));
  const auto ai = run_actions(env, 0, std::vector<Action>(100, Action::AI));
  EXPECT_EQ(env.workload(), 0);
  EXPECT_EQ(ai.total_cost(), 0);
  EXPECT_EQ(coverage(ai), 1.0);
  const auto human = run_actions(env, 0, std::vector<Action>(100, Action::Human));
  EXPECT_EQ(env.workload(), 100);
  EXPECT_EQ(human.total_cost(), 100);
  EXPECT_EQ(coverage(human), 0.0);
}

TEST(Step, PerfectHumanEarnsEveryReward) {
  DeferralEnv env(ft::make_env(ft::standard_stream(500), ft::constant_fatigue(1.0), 100));
  EXPECT_EQ(run_actions(env, 2, std::vector<Action>(100, Action::Human)).total_reward(), 100);
}

TEST(Step, LongAiEpisodeAccuracy) {
  DeferralEnv env(ft::make_env(ft::standard_stream(10000, 3), ft::example_one(), 10000));
  const auto traj = run_actions(env, 0, std::vector<Action>(10000, Action::AI));
  EXPECT_NEAR(traj.total_reward(), 6500, 150);
}

TEST(Step, EtaUsesPostIncrementWorkload) {
  const auto p = ft::example_one();
  DeferralEnv env(ft::make_env(ft::standard_stream(100), p, 5));
  env.reset(0);
  const auto out = env.step(Action::Human);
  EXPECT_DOUBLE_EQ(out.eta, 1.0 - performance(p, 1.0));
  EXPECT_EQ(out.next_state->workload, 1);
  EXPECT_DOUBLE_EQ(out.next_state->workload_fraction, 1.0 / p.horizon_l);
}

TEST(Step, RewardAndCostIdentities) {
  DeferralEnv env(ft::make_env(ft::standard_stream(500), preset("flickr"), 50));
  Rng rng = make_rng(8);
  for (std::uint64_t e = 0; e < 20; ++e) {
    env.reset(e);
    while (!env.terminal()) {
      const auto& inst = env.current_instance();
      const Action a = uniform01(rng) < 0.5 ? Action::AI : Action::Human;
      const auto out = env.step(a);
      EXPECT_EQ(out.cost, a == Action::Human ? 1 : 0);
      EXPECT_EQ(out.reward, out.final_prediction == inst.label ? 1 : 0);
      if (a == Action::AI) EXPECT_EQ(out.final_prediction, *inst.ai_prediction);
    }
  }
}

TEST(Step, ExhaustiveTransitionIdentitiesShortHorizon) {
  constexpr int T = 8;
  DeferralEnv env(ft::make_env(ft::standard_stream(50), ft::example_one(), T));
  for (unsigned mask = 0; mask < (1u << T); ++mask) {
    std::vector<Action> actions(T);
    for (int t = 0; t < T; ++t) actions[t] = (mask >> t) & 1u ? Action::Human : Action::AI;
    const auto traj = run_actions(env, 0, actions);
    int expected_workload = 0;
    for (int t = 0; t < T; ++t) {
      expected_workload += actions[t] == Action::Human;
      ASSERT_EQ(traj.workloads[t], expected_workload);
    }
    ASSERT_EQ(traj.total_cost(), std::popcount(mask));
    ASSERT_EQ(traj.total_cost(), T * (1.0 - coverage(traj)));
  }
}

TEST(Step, ReplayReproducesRewards) {
  const auto cfg = ft::make_env(ft::standard_stream(500), preset("cifar"), 60, 9);
  DeferralEnv env(cfg);
  Rng rng = make_rng(1);
  std::vector<Action> actions(60);
  for (auto& a : actions) a = uniform01(rng) < 0.4 ? Action::Human : Action::AI;
  const auto first = run_actions(env, 7, actions);
  DeferralEnv again(cfg);
  const auto second = run_actions(again, 7, actions);
  EXPECT_EQ(first.rewards, second.rewards);
  EXPECT_EQ(first.etas, second.etas);
}

TEST(Step, HumanCoinFlipsSharedAcrossPolicies) {
  // Same episode, same step: a deferral gets the same coin whatever came before.
  DeferralEnv env(ft::make_env(ft::standard_stream(500), ft::constant_fatigue(0.5), 10));
  std::vector<Action> a(10, Action::Human), b(10, Action::Human);
  b[0] = Action::AI;
  const auto ta = run_actions(env, 3, a);
  const auto tb = run_actions(env, 3, b);
  for (int t = 1; t < 10; ++t) EXPECT_EQ(ta.rewards[t], tb.rewards[t]);
}

TEST(Coverage, Formula) {
  std::vector<int> costs(100, 0);
  for (int i = 0; i < 40; ++i) costs[i] = 1;
  EXPECT_DOUBLE_EQ(coverage(costs), 0.6);
}

TEST(EpisodeConfig, Validation) {
  auto cfg = ft::make_env(ft::standard_stream(50), ft::example_one(), 0);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.length = 51;
  EXPECT_THROW(DeferralEnv{cfg}, ConfigError);
  cfg.length = 10;
  cfg.source = nullptr;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TrajectoryLog, Format) {
  DeferralEnv env(ft::make_env(ft::standard_stream(50), ft::constant_fatigue(1.0), 3));
  const auto traj = run_actions(env, 4, {Action::Human, Action::AI, Action::Human});
  std::ostringstream out;
  write_trajectory_log_header(out);
  write_trajectory_log(out, traj);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "episode,t,action,reward,cost,workload,eta");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 16), "4,1,human,1,1,1,");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 7), "4,2,ai,");
}
