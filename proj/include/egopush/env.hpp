#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "egopush/config.hpp"
#include "egopush/egoview.hpp"
#include "egopush/physics.hpp"
#include "egopush/reward.hpp"
#include "egopush/world.hpp"

namespace egopush {

enum class Curriculum { Full, ReachOnly };

struct EnvConfig {
  TaskSpec task = TaskSpec::make(Formation::Pair, ObjectShape::cube());
  CameraModel cam;
  RewardWeights weights;
  Thresholds thresholds;
  RewardPreset preset = RewardPreset::Ours;
  RewardFlags flags;
  PhysicsParams physics;
  SimClock clock;
  SceneSampling sampling;
  Curriculum curriculum = Curriculum::Full;
  int stage_budget = 250;
  int n_envs = 16;
  int workers = 1;
  std::uint64_t seed = 0;
  int k = 8;
  int n_obs_max = 3;

  int obs_dim() const { return GroupedObservation::dim(k, n_obs_max); }
  void validate() const;
};

// All defaults, every key present (the canonical config surface).
Config default_config();
EnvConfig env_config_from(const Config& cfg);

struct EnvInfo {
  int stage_idx = 0;
  int tau = 0;
  int gate = 0;
  double d_rbt = 0.0;
  double d_ref = 0.0;
  long episode_steps = 0;
};

struct EpisodeSummary {
  Outcome outcome = Outcome::Running;
  long steps = 0;
  double path_length = 0.0;
  bool reached = false;
  std::vector<bool> placed;  // per stage
  double final_distance = 0.0;  // active-to-target at termination
  double episode_return = 0.0;
  int env_index = 0;
  std::uint64_t episode_index = 0;
  std::uint64_t episode_seed = 0;
};

struct StepBatch {
  Eigen::MatrixXd obs;  // obs_dim x n_envs
  Eigen::VectorXd reward;
  std::vector<std::uint8_t> done;
  std::vector<Outcome> outcome;
  std::vector<EnvInfo> info;
  std::vector<RewardComponents> components;
};

class TrajWriter;

// One environment: the full action -> command -> PD -> physics -> stage ->
// reward -> termination pipeline, minus seeding/auto-reset policy (the
// batch layer owns those).
class EnvCore {
 public:
  explicit EnvCore(const EnvConfig& cfg);

  void reset(std::uint64_t episode_seed);

  struct StepResult {
    double reward = 0.0;
    Outcome outcome = Outcome::Running;
    RewardComponents components;
    StageEvents events;
  };
  // action is the raw policy output; it is clamped here before use.
  StepResult step(const Vec2& action);

  void write_observation(Eigen::Ref<Eigen::VectorXd> out) const;
  GroupedObservation observation() const;

  const World& world() const { return world_; }
  World& mutable_world() { return world_; }
  const StageState& stage() const { return stage_; }
  const StageRef& stage_ref() const {
    return world_.script.stages[stage_.success
                                    ? world_.script.n_stages() - 1
                                    : stage_.stage_idx];
  }
  const EnvConfig& config() const { return cfg_; }
  long episode_steps() const { return episode_steps_; }
  double episode_return() const { return episode_return_; }
  double path_length() const { return path_length_; }
  bool reached_ever() const { return reached_ever_; }
  const std::vector<bool>& place_flags() const { return place_flags_; }
  double last_target_distance() const { return last_d_ref_; }
  const Vec2& prev_action() const { return prev_action_; }
  std::uint64_t episode_seed() const { return episode_seed_; }

  EnvInfo info() const;

 private:
  EnvConfig cfg_;
  World world_;
  StageState stage_;
  Vec2 prev_action_ = Vec2::Zero();
  long episode_steps_ = 0;
  double episode_return_ = 0.0;
  double path_length_ = 0.0;
  bool reached_ever_ = false;
  std::vector<bool> place_flags_;
  double last_d_ref_ = 0.0;
  std::uint64_t episode_seed_ = 0;
};

// Vectorized stepping with deterministic per-(env, episode) seed streams and
// auto-reset. Results are independent of the worker count.
class BatchEnv {
 public:
  explicit BatchEnv(const EnvConfig& cfg);

  const StepBatch& reset(std::uint64_t seed);
  const StepBatch& step(const Eigen::Matrix2Xd& actions);
  const StepBatch& last() const { return batch_; }

  int n_envs() const { return cfg_.n_envs; }
  int obs_dim() const { return cfg_.obs_dim(); }
  const EnvConfig& config() const { return cfg_; }
  const EnvCore& env(int i) const { return envs_[i]; }

  // Episode summaries finished since the last drain, in (step, env) order.
  std::vector<EpisodeSummary> drain_summaries();

  // Optional JSON-lines recorder for one env (nullptr detaches).
  void attach_recorder(int env_index, TrajWriter* writer);

 private:
  void step_env(int i, const Vec2& action);

  EnvConfig cfg_;
  std::vector<EnvCore> envs_;
  std::vector<std::uint64_t> episode_counter_;
  std::vector<std::optional<EpisodeSummary>> pending_summary_;
  std::vector<EpisodeSummary> summaries_;
  std::vector<TrajWriter*> recorders_;
  StepBatch batch_;
  bool reset_called_ = false;
};

}  // namespace egopush
