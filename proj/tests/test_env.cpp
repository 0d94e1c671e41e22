#include <doctest.h>

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "egopush/env.hpp"
#include "egopush/rng.hpp"
#include "egopush/trajlog.hpp"

using namespace egopush;

namespace {

EnvConfig pair_env_config(int n_envs = 4) {
  Config c;
  c.set("env.n_envs", n_envs);
  return env_config_from(c);
}

Eigen::Matrix2Xd random_actions(Rng& rng, int n) {
  Eigen::Matrix2Xd a(2, n);
  for (int i = 0; i < n; ++i) {
    a(0, i) = rng.uniform(-1, 1);
    a(1, i) = rng.uniform(-1, 1);
  }
  return a;
}

}  // namespace

TEST_SUITE("envbatch") {

TEST_CASE("reset is deterministic per seed") {
  EnvConfig cfg = pair_env_config(1);
  BatchEnv a(cfg), b(cfg);
  const StepBatch& ba = a.reset(7);
  const StepBatch& bb = b.reset(7);
  CHECK(ba.obs == bb.obs);
}

TEST_CASE("64 envs give pairwise distinct scenes") {
  EnvConfig cfg = pair_env_config(64);
  BatchEnv env(cfg);
  const StepBatch& batch = env.reset(3);
  std::set<std::string> hashes;
  for (int i = 0; i < 64; ++i) {
    std::ostringstream os;
    os.precision(17);
    os << env.env(i).world().robot.pose.x << ","
       << env.env(i).world().robot.pose.y << ","
       << env.env(i).world().objects[0].pose.x;
    hashes.insert(os.str());
  }
  CHECK(hashes.size() == 64);
  CHECK(batch.obs.cols() == 64);
}

TEST_CASE("invalid task combinations are rejected") {
  Config c;
  c.set("task.formation", "cross");
  c.set("task.spacing", 0.01);
  CHECK_THROWS(env_config_from(c));
}

TEST_CASE("zero actions reach the episode timeout at 1000 steps") {
  // Pair task: one stage, so the auto stage budget equals the episode limit
  // and the episode clock is what fires.
  EnvConfig cfg = pair_env_config(1);
  BatchEnv env(cfg);
  env.reset(12);
  Eigen::Matrix2Xd zero = Eigen::Matrix2Xd::Zero(2, 1);
  long t = 0;
  Outcome last = Outcome::Running;
  while (t < 1200) {
    const StepBatch& b = env.step(zero);
    ++t;
    if (b.done[0]) {
      last = b.outcome[0];
      break;
    }
  }
  CHECK(t == 1000);
  CHECK(last == Outcome::EpisodeTimeout);

  // Cross task: four stages of 250 steps; the stage timer fires first.
  Config c;
  c.set("env.n_envs", 1);
  c.set("task.formation", "cross");
  BatchEnv env2(env_config_from(c));
  env2.reset(12);
  t = 0;
  while (t < 1200) {
    const StepBatch& b = env2.step(zero);
    ++t;
    if (b.done[0]) {
      last = b.outcome[0];
      break;
    }
  }
  CHECK(t == 250);
  CHECK(last == Outcome::StageTimeout);
}

TEST_CASE("serial and 8-worker execution are bit-identical") {
  Config c;
  c.set("env.n_envs", 16);
  EnvConfig cfg1 = env_config_from(c);
  cfg1.workers = 1;
  EnvConfig cfg8 = cfg1;
  cfg8.workers = 8;

  BatchEnv e1(cfg1), e8(cfg8);
  e1.reset(99);
  e8.reset(99);
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    Eigen::Matrix2Xd a = random_actions(rng, 16);
    const StepBatch& b1 = e1.step(a);
    Eigen::MatrixXd obs1 = b1.obs;
    Eigen::VectorXd r1 = b1.reward;
    const StepBatch& b8 = e8.step(a);
    REQUIRE(obs1 == b8.obs);
    REQUIRE(r1 == b8.reward);
    for (int i = 0; i < 16; ++i) REQUIRE(b1.done[i] == b8.done[i]);
  }
  auto s1 = e1.drain_summaries();
  auto s8 = e8.drain_summaries();
  REQUIRE(s1.size() == s8.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].env_index == s8[i].env_index);
    CHECK(s1[i].steps == s8[i].steps);
    CHECK(s1[i].episode_return == s8[i].episode_return);
  }
}

TEST_CASE("auto-reset seed stream is a pure function of (seed, env, episode)") {
  // Env 2's episode-1 world must not depend on other envs' activity.
  Config c;
  c.set("env.n_envs", 4);
  c.set("env.stage_budget", 50);  // quick stage timeouts
  EnvConfig cfg = env_config_from(c);
  BatchEnv env(cfg);
  env.reset(1234);
  Eigen::Matrix2Xd zero = Eigen::Matrix2Xd::Zero(2, 4);
  for (int t = 0; t < 50; ++t) env.step(zero);
  // All four just reset into episode 1.
  World w2 = env.env(2).world();

  EnvCore solo(cfg);
  solo.reset(derive_seed(1234, 2, 1));
  CHECK(solo.world().robot.pose.x == w2.robot.pose.x);
  CHECK(solo.world().objects[1].pose.y == w2.objects[1].pose.y);
}

TEST_CASE("NaN and shape errors are rejected") {
  EnvConfig cfg = pair_env_config(2);
  BatchEnv env(cfg);
  env.reset(0);
  Eigen::Matrix2Xd bad(2, 2);
  bad.setZero();
  bad(0, 1) = std::nan("");
  CHECK_THROWS(env.step(bad));
  Eigen::Matrix2Xd wrong = Eigen::Matrix2Xd::Zero(2, 3);
  CHECK_THROWS(env.step(wrong));
  BatchEnv fresh(cfg);
  CHECK_THROWS(fresh.step(Eigen::Matrix2Xd::Zero(2, 2)));  // step before reset
}

TEST_CASE("trajectory log: counts, replay, and stage bookkeeping") {
  Config c;
  c.set("env.n_envs", 1);
  EnvConfig cfg = env_config_from(c);
  BatchEnv env(cfg);

  std::string path = "traj_test.jsonl";
  {
    std::ofstream out(path);
    TrajWriter writer(out);
    env.attach_recorder(0, &writer);
    env.reset(77);
    Rng rng(8);
    for (int t = 0; t < 10; ++t) env.step(random_actions(rng, 1));
    env.attach_recorder(0, nullptr);
  }

  // 10 step records + the reset record.
  std::ifstream in(path);
  int n_reset = 0, n_step = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"reset\"") != std::string::npos) ++n_reset;
    if (line.find("\"step\"") != std::string::npos) ++n_step;
  }
  CHECK(n_reset == 1);
  CHECK(n_step == 10);

  ReplayReport report = replay_check(path, cfg);
  CHECK(report.exact);
  CHECK(report.episodes == 1);
  CHECK(report.steps == 10);
}

TEST_CASE("replay of full episodes with auto-resets is exact") {
  Config c;
  c.set("env.n_envs", 1);
  c.set("env.stage_budget", 60);
  EnvConfig cfg = env_config_from(c);
  BatchEnv env(cfg);
  std::string path = "traj_replay.jsonl";
  {
    std::ofstream out(path);
    TrajWriter writer(out);
    env.attach_recorder(0, &writer);
    env.reset(31);
    Rng rng(4);
    for (int t = 0; t < 200; ++t) env.step(random_actions(rng, 1));
    env.attach_recorder(0, nullptr);
  }
  ReplayReport report = replay_check(path, cfg);
  INFO(report.message);
  CHECK(report.exact);
  CHECK(report.episodes >= 3);  // several stage timeouts in 200 steps
}

TEST_CASE("info carries stage state and distances") {
  EnvConfig cfg = pair_env_config(1);
  BatchEnv env(cfg);
  const StepBatch& b0 = env.reset(5);
  CHECK(b0.info[0].stage_idx == 0);
  CHECK(b0.info[0].tau == 0);
  CHECK(b0.info[0].d_rbt > 0.0);
  const StepBatch& b1 = env.step(Eigen::Matrix2Xd::Zero(2, 1));
  CHECK(b1.info[0].tau == 1);
}

}  // TEST_SUITE
