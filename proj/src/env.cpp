#include "egopush/env.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "egopush/rng.hpp"
#include "egopush/trajlog.hpp"

namespace egopush {

void EnvConfig::validate() const {
  if (n_envs < 1) throw std::runtime_error("env: n_envs must be >= 1");
  if (workers < 1) throw std::runtime_error("env: workers must be >= 1");
  if (stage_budget < 0) throw std::runtime_error("env: stage_budget >= 0");
  if (k < 4) throw std::runtime_error("env: k must be >= 4");
  task.validate();
  if (std::abs(clock.policy_dt() - clock.dt * clock.decimation) > 1e-12)
    throw std::runtime_error("env: policy_dt must equal dt * decimation");
}

Config default_config() {
  Config c;
  c.set("task.formation", "pair");
  c.set("task.shape", "cube");
  c.set("task.spacing", 0.30);
  c.set("task.arena_radius", 1.5);

  c.set("physics.mu_ground", 0.4);
  c.set("physics.mu_push", 0.3);
  c.set("physics.box_mass", 0.5);
  c.set("physics.robot_mass", 1.0);
  c.set("physics.robot_inertia", 0.004);
  c.set("physics.track_width", 0.16);
  c.set("physics.max_v", 0.4);
  c.set("physics.max_w", 2.84);
  c.set("physics.pd_kp", 20.0);
  c.set("physics.pd_kd", 1.0);
  c.set("physics.pd_passthrough", false);
  c.set("physics.solver_iters", 16);
  c.set("physics.slop", 0.0005);
  c.set("physics.clearance", 0.05);
  c.set("physics.max_retries", 1000);

  c.set("camera.fov_h_deg", 70.0);
  c.set("camera.fov_v_deg", 60.0);
  c.set("camera.d_min", 0.15);
  c.set("camera.d_max", 5.0);
  c.set("camera.mask_value", -10.0);
  c.set("camera.u_gate", 0.5);
  c.set("camera.v_gate", 0.5);
  c.set("camera.height", 0.20);
  c.set("camera.pitch_deg", 11.5);
  c.set("camera.fov_masking", true);
  c.set("camera.cgv", true);
  c.set("camera.n_obs_max", 3);

  c.set("reward.preset", "ours");
  c.set("reward.w_rbt", 1.0);
  c.set("reward.w_ref", 1.0);
  c.set("reward.w_reach", 10.0);
  c.set("reward.w_place", 10.0);
  c.set("reward.w_smooth", 0.01);
  c.set("reward.w_slow", 0.1);
  c.set("reward.eps0", 1e-6);
  c.set("reward.shaping", true);
  c.set("reward.smoothness", true);
  c.set("reward.slowdown", true);

  c.set("thresholds.reach", 0.2);
  c.set("thresholds.align", 0.10);
  c.set("thresholds.phi", 0.3);
  c.set("thresholds.vel", 0.05);
  c.set("thresholds.smooth", 0.1);
  c.set("thresholds.d_th", 0.5);
  c.set("thresholds.v_th", 0.2);

  c.set("env.n_envs", 16);
  c.set("env.workers", 1);
  c.set("env.seed", 0);
  c.set("env.episode_limit", 1000);
  c.set("env.stage_budget", 0);  // 0 = episode_limit / n_stages
  c.set("env.curriculum", "full");
  c.set("env.k", 8);

  c.set("net.latent_dim", 64);
  c.set("net.point_h1", 64);
  c.set("net.point_h2", 128);
  c.set("net.mlp_width", 256);
  c.set("net.eps_feed", false);

  c.set("ppo.lr", 2.5e-4);
  c.set("ppo.gamma", 0.99);
  c.set("ppo.lam", 0.95);
  c.set("ppo.clip", 0.2);
  c.set("ppo.epochs", 8);
  c.set("ppo.minibatches", 32);
  c.set("ppo.rollout", 32);
  c.set("ppo.entropy_coef", 0.003);
  c.set("ppo.value_coef", 0.5);
  c.set("ppo.max_grad_norm", 1.0);
  c.set("ppo.init_std", 0.5);
  c.set("ppo.total_steps", 150000);

  c.set("distill.lambda_rel", 1.0);
  c.set("distill.lr", 1e-3);
  c.set("distill.warm_start", true);
  c.set("distill.iterations", 200);
  c.set("distill.student", "keypoint");
  c.set("distill.noise_scale", 0.005);
  c.set("distill.dropout_rate", 0.02);

  c.set("render.width", 104);
  c.set("render.height", 90);

  c.set("eval.episodes", 256);
  c.set("eval.eps_train", 0.10);
  return c;
}

EnvConfig env_config_from(const Config& user) {
  Config c = default_config();
  c.merge(user);
  EnvConfig e;

  Formation f = formation_from_name(c.get_str("task.formation", "pair"));
  ObjectShape shape = shape_from_name(c.get_str("task.shape", "cube"));
  e.task = TaskSpec::make(f, shape, c.get_double("task.spacing", 0.30),
                          c.get_double("task.arena_radius", 1.5));

  e.physics.mu_ground = c.get_double("physics.mu_ground", 0.4);
  e.physics.mu_push = c.get_double("physics.mu_push", 0.3);
  e.physics.box_mass = c.get_double("physics.box_mass", 0.5);
  e.physics.robot_mass = c.get_double("physics.robot_mass", 1.0);
  e.physics.robot_inertia = c.get_double("physics.robot_inertia", 0.004);
  e.physics.track_width = c.get_double("physics.track_width", 0.16);
  e.physics.max_v = c.get_double("physics.max_v", 0.4);
  e.physics.max_w = c.get_double("physics.max_w", 2.84);
  e.physics.pd.kp = c.get_double("physics.pd_kp", 20.0);
  e.physics.pd.kd = c.get_double("physics.pd_kd", 1.0);
  e.physics.pd.passthrough = c.get_bool("physics.pd_passthrough", false);
  e.physics.solver_iters = c.get_int("physics.solver_iters", 16);
  e.physics.slop = c.get_double("physics.slop", 0.0005);
  e.sampling.clearance = c.get_double("physics.clearance", 0.05);
  e.sampling.max_retries = c.get_int("physics.max_retries", 1000);

  e.cam.fov_h = c.get_double("camera.fov_h_deg", 70.0) * kPi / 180.0;
  e.cam.fov_v = c.get_double("camera.fov_v_deg", 60.0) * kPi / 180.0;
  e.cam.d_min = c.get_double("camera.d_min", 0.15);
  e.cam.d_max = c.get_double("camera.d_max", 5.0);
  double mv = c.get_double("camera.mask_value", -10.0);
  e.cam.mask_value = Vec3(mv, mv, mv);
  e.cam.u_gate = c.get_double("camera.u_gate", 0.5);
  e.cam.v_gate = c.get_double("camera.v_gate", 0.5);
  e.cam.height = c.get_double("camera.height", 0.20);
  e.cam.pitch = c.get_double("camera.pitch_deg", 11.5) * kPi / 180.0;
  e.cam.fov_masking = c.get_bool("camera.fov_masking", true);
  e.cam.cgv = c.get_bool("camera.cgv", true);
  e.n_obs_max = c.get_int("camera.n_obs_max", 3);

  e.preset = preset_from_name(c.get_str("reward.preset", "ours"));
  e.weights.w_rbt = c.get_double("reward.w_rbt", 1.0);
  e.weights.w_ref = c.get_double("reward.w_ref", 1.0);
  e.weights.w_reach = c.get_double("reward.w_reach", 10.0);
  e.weights.w_place = c.get_double("reward.w_place", 10.0);
  e.weights.w_smooth = c.get_double("reward.w_smooth", 0.01);
  e.weights.w_slow = c.get_double("reward.w_slow", 0.1);
  e.weights.eps0 = c.get_double("reward.eps0", 1e-6);
  e.flags.shaping = c.get_bool("reward.shaping", true);
  e.flags.smoothness = c.get_bool("reward.smoothness", true);
  e.flags.slowdown = c.get_bool("reward.slowdown", true);

  e.thresholds.reach = c.get_double("thresholds.reach", 0.2);
  e.thresholds.align = c.get_double("thresholds.align", 0.10);
  e.thresholds.phi = c.get_double("thresholds.phi", 0.3);
  e.thresholds.vel = c.get_double("thresholds.vel", 0.05);
  e.thresholds.smooth = c.get_double("thresholds.smooth", 0.1);
  e.thresholds.d_th = c.get_double("thresholds.d_th", 0.5);
  e.thresholds.v_th = c.get_double("thresholds.v_th", 0.2);

  e.n_envs = c.get_int("env.n_envs", 16);
  e.workers = c.get_int("env.workers", 1);
  e.seed = static_cast<std::uint64_t>(c.get_i64("env.seed", 0));
  e.clock.episode_limit = c.get_int("env.episode_limit", 1000);
  e.stage_budget = c.get_int("env.stage_budget", 0);
  std::string cur = c.get_str("env.curriculum", "full");
  if (cur == "full")
    e.curriculum = Curriculum::Full;
  else if (cur == "reach_only")
    e.curriculum = Curriculum::ReachOnly;
  else
    throw std::runtime_error("unknown curriculum: " + cur);
  e.k = c.get_int("env.k", 8);

  e.validate();
  return e;
}

EnvCore::EnvCore(const EnvConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
}

void EnvCore::reset(std::uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  world_ = sample_initial_scene(cfg_.task, episode_seed, cfg_.sampling);
  stage_ = StageState{};
  // 0 means auto: split the episode budget evenly across the stages.
  stage_.stage_budget =
      cfg_.stage_budget > 0
          ? cfg_.stage_budget
          : cfg_.clock.episode_limit / world_.script.n_stages();
  init_stage_distances(world_, stage_);
  prev_action_ = Vec2::Zero();
  episode_steps_ = 0;
  episode_return_ = 0.0;
  path_length_ = 0.0;
  reached_ever_ = false;
  place_flags_.assign(world_.script.n_stages(), false);
  last_d_ref_ = stage_.prev_d_ref;
}

EnvCore::StepResult EnvCore::step(const Vec2& action) {
  if (!std::isfinite(action.x()) || !std::isfinite(action.y()))
    throw std::runtime_error("env: NaN action");
  Vec2 a(std::clamp(action.x(), -1.0, 1.0), std::clamp(action.y(), -1.0, 1.0));

  Vec2 cmd = action_to_command(a, cfg_.physics);
  world_.robot.commanded = cmd;
  Vec2 wheels = command_to_wheels(cmd.x(), cmd.y(), cfg_.physics.track_width);

  Vec2 robot_before = world_.robot.pose.position();
  std::vector<ContactEvent> contacts =
      step_physics(world_, wheels, cfg_.clock, cfg_.physics);
  path_length_ += (world_.robot.pose.position() - robot_before).norm();

  const StageRef& sref = world_.script.stages[stage_.stage_idx];

  RewardComponents comps;
  comps.tau = stage_.tau;
  comps.stage_budget = stage_.stage_budget;
  comps.episode_step = episode_steps_;
  comps.episode_limit = cfg_.clock.episode_limit;
  comps.progress = progress_reward(world_, sref, stage_, cfg_.weights);
  comps.smooth_pen = smoothness_penalty(a, prev_action_, cfg_.thresholds.smooth);
  comps.slow = slowdown_reward(world_, sref, cfg_.thresholds);

  // Refresh phase distances for the next step, then run the stage machine
  // (which overwrites them again on a stage advance).
  stage_.prev_d_rbt = robot_active_distance(world_, sref);
  stage_.prev_d_ref = active_target_distance(world_, sref);
  last_d_ref_ = stage_.prev_d_ref;

  int stage_before = stage_.stage_idx;
  StageEvents events = cfg_.curriculum == Curriculum::ReachOnly
                           ? update_stage_reach_only(world_, stage_, cfg_.thresholds)
                           : update_stage(world_, stage_, cfg_.thresholds);
  comps.reached = events.reached;
  comps.placed = events.placed;
  comps.success = events.success;
  if (events.reached) reached_ever_ = true;
  if (events.placed) place_flags_[stage_before] = true;

  bool advanced = events.success || stage_.stage_idx != stage_before;
  if (!advanced) ++stage_.tau;
  ++episode_steps_;

  double reward = total_reward(comps, cfg_.weights, cfg_.preset, cfg_.flags);
  episode_return_ += reward;
  prev_action_ = a;

  StepResult res;
  res.reward = reward;
  res.components = comps;
  res.events = events;
  res.outcome =
      check_termination(world_, stage_, contacts, episode_steps_, cfg_.clock);
  return res;
}

void EnvCore::write_observation(Eigen::Ref<Eigen::VectorXd> out) const {
  out = observation().flatten();
}

GroupedObservation EnvCore::observation() const {
  return assemble_observation(world_, world_.robot.pose, cfg_.cam,
                              prev_action_, stage_ref(), cfg_.k,
                              cfg_.n_obs_max);
}

EnvInfo EnvCore::info() const {
  EnvInfo inf;
  inf.stage_idx = stage_.stage_idx;
  inf.tau = stage_.tau;
  inf.gate = stage_.gate;
  const StageRef& sref = stage_ref();
  inf.d_rbt = robot_active_distance(world_, sref);
  inf.d_ref = active_target_distance(world_, sref);
  inf.episode_steps = episode_steps_;
  return inf;
}

BatchEnv::BatchEnv(const EnvConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  envs_.assign(cfg_.n_envs, EnvCore(cfg_));
  episode_counter_.assign(cfg_.n_envs, 0);
  pending_summary_.assign(cfg_.n_envs, std::nullopt);
  recorders_.assign(cfg_.n_envs, nullptr);
  batch_.obs.resize(cfg_.obs_dim(), cfg_.n_envs);
  batch_.reward.resize(cfg_.n_envs);
  batch_.done.assign(cfg_.n_envs, 0);
  batch_.outcome.assign(cfg_.n_envs, Outcome::Running);
  batch_.info.assign(cfg_.n_envs, EnvInfo{});
  batch_.components.assign(cfg_.n_envs, RewardComponents{});
}

const StepBatch& BatchEnv::reset(std::uint64_t seed) {
  cfg_.seed = seed;
  for (int i = 0; i < cfg_.n_envs; ++i) {
    episode_counter_[i] = 0;
    envs_[i].reset(derive_seed(seed, i, 0));
    envs_[i].write_observation(batch_.obs.col(i));
    batch_.reward[i] = 0.0;
    batch_.done[i] = 0;
    batch_.outcome[i] = Outcome::Running;
    batch_.info[i] = envs_[i].info();
    if (recorders_[i]) recorders_[i]->write_reset(envs_[i]);
  }
  reset_called_ = true;
  return batch_;
}

void BatchEnv::step_env(int i, const Vec2& action) {
  EnvCore& env = envs_[i];
  EnvCore::StepResult res = env.step(action);
  batch_.reward[i] = res.reward;
  batch_.outcome[i] = res.outcome;
  batch_.components[i] = res.components;
  batch_.done[i] = res.outcome != Outcome::Running ? 1 : 0;
  batch_.info[i] = env.info();
  if (recorders_[i]) recorders_[i]->write_step(env, action, res);

  if (res.outcome != Outcome::Running) {
    EpisodeSummary s;
    s.outcome = res.outcome;
    s.steps = env.episode_steps();
    s.path_length = env.path_length();
    s.reached = env.reached_ever();
    s.placed = env.place_flags();
    s.final_distance = env.last_target_distance();
    s.episode_return = env.episode_return();
    s.env_index = i;
    s.episode_index = episode_counter_[i];
    s.episode_seed = env.episode_seed();
    pending_summary_[i] = s;

    ++episode_counter_[i];
    env.reset(derive_seed(cfg_.seed, i, episode_counter_[i]));
    if (recorders_[i]) recorders_[i]->write_reset(env);
  }
  env.write_observation(batch_.obs.col(i));
}

const StepBatch& BatchEnv::step(const Eigen::Matrix2Xd& actions) {
  if (!reset_called_) throw std::runtime_error("env: step before reset");
  if (actions.cols() != cfg_.n_envs)
    throw std::runtime_error("env: action batch shape mismatch");

  if (cfg_.workers <= 1 || cfg_.n_envs == 1) {
    for (int i = 0; i < cfg_.n_envs; ++i) step_env(i, actions.col(i));
  } else {
    int n_workers = std::min(cfg_.workers, cfg_.n_envs);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([this, &actions, w, n_workers]() {
        for (int i = w; i < cfg_.n_envs; i += n_workers)
          step_env(i, actions.col(i));
      });
    }
    for (auto& t : pool) t.join();
  }

  // Merge finished episodes in env-index order so the stream is
  // worker-count independent.
  for (int i = 0; i < cfg_.n_envs; ++i) {
    if (pending_summary_[i]) {
      summaries_.push_back(*pending_summary_[i]);
      pending_summary_[i].reset();
    }
  }
  return batch_;
}

std::vector<EpisodeSummary> BatchEnv::drain_summaries() {
  std::vector<EpisodeSummary> out;
  out.swap(summaries_);
  return out;
}

void BatchEnv::attach_recorder(int env_index, TrajWriter* writer) {
  recorders_.at(env_index) = writer;
}

}  // namespace egopush
