#include "egopush/reward.hpp"

#include <cmath>
#include <stdexcept>

namespace egopush {

RewardPreset preset_from_name(const std::string& name) {
  if (name == "base") return RewardPreset::Base;
  if (name == "swr") return RewardPreset::Swr;
  if (name == "swr_td") return RewardPreset::SwrTd;
  if (name == "ours") return RewardPreset::Ours;
  throw std::runtime_error("unknown reward preset: " + name);
}

std::string preset_name(RewardPreset p) {
  switch (p) {
    case RewardPreset::Base:
      return "base";
    case RewardPreset::Swr:
      return "swr";
    case RewardPreset::SwrTd:
      return "swr_td";
    case RewardPreset::Ours:
      return "ours";
  }
  return "?";
}

double time_factor(int tau, int stage_budget, double eps0) {
  if (tau < 0 || tau > stage_budget)
    throw std::runtime_error("time_factor: tau outside [0, T_s]");
  return static_cast<double>(stage_budget - tau) /
         (static_cast<double>(stage_budget) + eps0);
}

Pose2 stage_target_pose(const World& world, const StageRef& stage) {
  const SceneObject& anchor = world.object_by_id(world.anchor_id());
  return compose(anchor.pose, stage.rel_target);
}

double robot_active_distance(const World& world, const StageRef& stage) {
  const SceneObject& act = world.object_by_id(stage.active_id);
  return (world.robot.pose.position() - act.pose.position()).norm();
}

double active_target_distance(const World& world, const StageRef& stage) {
  const SceneObject& act = world.object_by_id(stage.active_id);
  return (act.pose.position() - stage_target_pose(world, stage).position())
      .norm();
}

bool reach_condition(const World& world, const StageRef& stage,
                     const Thresholds& th) {
  return robot_active_distance(world, stage) < th.reach;
}

double symmetry_yaw_error(double yaw, double target_yaw, double symmetry) {
  if (symmetry <= 0.0) return 0.0;
  double err = std::remainder(yaw - target_yaw, symmetry);
  return std::abs(err);
}

bool place_condition(const World& world, const StageRef& stage,
                     const Thresholds& th) {
  const SceneObject& act = world.object_by_id(stage.active_id);
  if (active_target_distance(world, stage) >= th.align) return false;
  Pose2 target = stage_target_pose(world, stage);
  double dpsi =
      symmetry_yaw_error(act.pose.yaw, target.yaw, act.shape.yaw_symmetry());
  if (dpsi >= th.phi) return false;
  return act.lin_vel.norm() < th.vel;
}

double reach_reward(const World& world, const StageRef& stage_ref,
                    const StageState& st, const Thresholds& th, double eps0) {
  if (st.gate != 0 || st.reach_latched) return 0.0;
  if (!reach_condition(world, stage_ref, th)) return 0.0;
  return time_factor(st.tau, st.stage_budget, eps0);
}

double place_reward(const World& world, const StageRef& stage_ref,
                    const StageState& st, const Thresholds& th, double eps0) {
  if (st.gate != 1 || st.place_latched) return 0.0;
  if (!place_condition(world, stage_ref, th)) return 0.0;
  return time_factor(st.tau, st.stage_budget, eps0);
}

double progress_reward(const World& world, const StageRef& stage_ref,
                       const StageState& st, const RewardWeights& w) {
  double d_rbt = robot_active_distance(world, stage_ref);
  double d_ref = active_target_distance(world, stage_ref);
  if (st.gate == 0) return w.w_rbt * (st.prev_d_rbt - d_rbt);
  return w.w_ref * (st.prev_d_ref - d_ref);
}

double smoothness_penalty(const Vec2& action, const Vec2& prev_action,
                          double eps_smooth) {
  double dv = action.x() - prev_action.x();
  double dw = action.y() - prev_action.y();
  double pen = 0.0;
  if (dv > eps_smooth) pen += dv * dv * dv * dv;
  if (dw > eps_smooth) pen += dw * dw * dw * dw;
  return pen;
}

double slowdown_reward(const World& world, const StageRef& stage_ref,
                       const Thresholds& th) {
  double d = active_target_distance(world, stage_ref);
  if (d >= th.d_th) return 0.0;
  double g_d = 1.0 - d / th.d_th;
  const SceneObject& act = world.object_by_id(stage_ref.active_id);
  double g_v = std::max(-1.0, 1.0 - act.lin_vel.norm() / th.v_th);
  return g_d * g_v;
}

double total_reward(const RewardComponents& c, const RewardWeights& w,
                    RewardPreset preset, const RewardFlags& flags) {
  if (preset == RewardPreset::Base)
    return c.success ? w.w_place : 0.0;

  double eta = 1.0;
  if (preset == RewardPreset::SwrTd)
    eta = static_cast<double>(c.episode_limit - c.episode_step) /
          (static_cast<double>(c.episode_limit) + w.eps0);
  else if (preset == RewardPreset::Ours)
    eta = static_cast<double>(c.stage_budget - c.tau) /
          (static_cast<double>(c.stage_budget) + w.eps0);

  double r = 0.0;
  if (c.reached) r += w.w_reach * eta;
  if (c.placed) r += w.w_place * eta;
  if (flags.shaping) r += c.progress;
  if (flags.smoothness) r -= w.w_smooth * c.smooth_pen;
  if (flags.slowdown) r += w.w_slow * c.slow;
  return r;
}

void init_stage_distances(const World& world, StageState& st) {
  const StageRef& ref = world.script.stages[st.stage_idx];
  st.prev_d_rbt = robot_active_distance(world, ref);
  st.prev_d_ref = active_target_distance(world, ref);
}

namespace {

StageEvents update_stage_impl(World& world, StageState& st,
                              const Thresholds& th, bool reach_completes) {
  StageEvents ev;
  if (st.success) return ev;
  const StageRef& ref = world.script.stages[st.stage_idx];

  bool advance = false;
  if (st.gate == 0 && reach_condition(world, ref, th)) {
    ev.reached = true;
    st.reach_latched = true;
    if (reach_completes) {
      advance = true;
    } else {
      st.gate = 1;  // tau keeps running
    }
  } else if (st.gate == 1 && !st.place_latched &&
             place_condition(world, ref, th)) {
    ev.placed = true;
    st.place_latched = true;
    advance = true;
  }

  if (advance) {
    if (st.stage_idx + 1 >= world.script.n_stages()) {
      st.success = true;
      ev.success = true;
    } else {
      ++st.stage_idx;
      st.tau = 0;
      st.gate = 0;
      st.reach_latched = false;
      st.place_latched = false;
      world.assign_roles(st.stage_idx);
      init_stage_distances(world, st);
    }
  }
  return ev;
}

}  // namespace

StageEvents update_stage(World& world, StageState& st, const Thresholds& th) {
  return update_stage_impl(world, st, th, false);
}

StageEvents update_stage_reach_only(World& world, StageState& st,
                                    const Thresholds& th) {
  return update_stage_impl(world, st, th, true);
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Running:
      return "Running";
    case Outcome::Success:
      return "Success";
    case Outcome::Outside:
      return "Outside";
    case Outcome::Collision:
      return "Collision";
    case Outcome::StageTimeout:
      return "StageTimeout";
    case Outcome::EpisodeTimeout:
      return "EpisodeTimeout";
  }
  return "?";
}

Outcome check_termination(const World& world, const StageState& st,
                          const std::vector<ContactEvent>& contacts,
                          long episode_steps, const SimClock& clock) {
  if (st.success) return Outcome::Success;
  if (is_terminal_collision(contacts)) return Outcome::Collision;
  if (world.robot.pose.position().norm() > world.task.arena_radius)
    return Outcome::Outside;
  if (st.tau >= st.stage_budget) return Outcome::StageTimeout;
  if (episode_steps >= clock.episode_limit) return Outcome::EpisodeTimeout;
  return Outcome::Running;
}

}  // namespace egopush
