#pragma once

#include <string>

#include "egopush/physics.hpp"
#include "egopush/world.hpp"

namespace egopush {

// Stage machinery: one reach-then-place cycle per stage, a stage-local timer
// driving the temporal decay factor, and a phase gate that flips 0 -> 1 at
// the reach event.
struct StageState {
  int stage_idx = 0;
  int tau = 0;       // stage-local elapsed steps, reset at stage boundaries
  int gate = 0;      // 0 reach phase, 1 place phase
  int stage_budget = 250;  // T_s
  bool reach_latched = false;
  bool place_latched = false;
  double prev_d_rbt = 0.0;
  double prev_d_ref = 0.0;
  bool success = false;
};

struct RewardWeights {
  double w_rbt = 1.0;
  double w_ref = 1.0;
  double w_reach = 10.0;
  double w_place = 10.0;
  double w_smooth = 0.01;
  double w_slow = 0.1;
  double eps0 = 1e-6;
};

struct Thresholds {
  double reach = 0.2;     // eps_reach (m)
  double align = 0.10;    // eps_align (m)
  double phi = 0.3;       // eps_phi (rad)
  double vel = 0.05;      // eps_v (m/s)
  double smooth = 0.1;    // eps_smooth (action units)
  double d_th = 0.5;      // eps_d,th (m)
  double v_th = 0.2;      // eps_v,th (m/s)
};

enum class RewardPreset { Base, Swr, SwrTd, Ours };

RewardPreset preset_from_name(const std::string& name);
std::string preset_name(RewardPreset p);

// Which optional terms enter the total (completion terms are governed by
// the preset itself).
struct RewardFlags {
  bool shaping = true;
  bool smoothness = true;
  bool slowdown = true;
};

// eta = (T_s - tau) / (T_s + eps0); strictly decreasing, eta(T_s) = 0.
// Throws if tau is outside [0, T_s].
double time_factor(int tau, int stage_budget, double eps0);

// Current world-frame target pose of the active object for this stage
// (anchor pose composed with the scripted relative target).
Pose2 stage_target_pose(const World& world, const StageRef& stage);

double robot_active_distance(const World& world, const StageRef& stage);
double active_target_distance(const World& world, const StageRef& stage);

bool reach_condition(const World& world, const StageRef& stage,
                     const Thresholds& th);
// Position + symmetry-wrapped yaw + settled-velocity gates.
bool place_condition(const World& world, const StageRef& stage,
                     const Thresholds& th);

// Yaw error folded by the shape's rotational symmetry (cube pi/2, prism
// 2pi/3, cylinder always 0).
double symmetry_yaw_error(double yaw, double target_yaw, double symmetry);

// One-shot reach completion reward for the current step. Zero once latched
// or after the gate has flipped.
double reach_reward(const World& world, const StageRef& stage_ref,
                    const StageState& st, const Thresholds& th,
                    double eps0 = 1e-6);

// One-shot place completion reward; only live in the place phase.
double place_reward(const World& world, const StageRef& stage_ref,
                    const StageState& st, const Thresholds& th,
                    double eps0 = 1e-6);

// Phase-gated distance decrease, already weighted by w_rbt / w_ref.
double progress_reward(const World& world, const StageRef& stage_ref,
                       const StageState& st, const RewardWeights& w);

double smoothness_penalty(const Vec2& action, const Vec2& prev_action,
                          double eps_smooth);

double slowdown_reward(const World& world, const StageRef& stage_ref,
                       const Thresholds& th);

struct StageEvents {
  bool reached = false;
  bool placed = false;
  bool success = false;
};

struct RewardComponents {
  bool reached = false;
  bool placed = false;
  bool success = false;
  double progress = 0.0;
  double smooth_pen = 0.0;
  double slow = 0.0;
  int tau = 0;
  int stage_budget = 250;
  long episode_step = 0;
  long episode_limit = 1000;
};

// Combine components under a preset:
//   base    terminal success bonus only
//   swr     stage completion rewards with eta == 1
//   swr_td  eta from the global episode timer
//   ours    eta from the stage-local timer
double total_reward(const RewardComponents& c, const RewardWeights& w,
                    RewardPreset preset, const RewardFlags& flags);

// Advance the stage machine for the post-physics world. Flips the gate at
// the reach event; on a place event advances the stage (roles reassigned,
// timers and prev-distances reset) or marks terminal success.
StageEvents update_stage(World& world, StageState& st, const Thresholds& th);

// Curriculum variant: the stage completes at the reach event itself (used
// by the reach-only training gate).
StageEvents update_stage_reach_only(World& world, StageState& st,
                                    const Thresholds& th);

void init_stage_distances(const World& world, StageState& st);

enum class Outcome {
  Running,
  Success,
  Outside,
  Collision,
  StageTimeout,
  EpisodeTimeout
};

std::string outcome_name(Outcome o);

// Precedence: Success > Collision > Outside > StageTimeout > EpisodeTimeout.
Outcome check_termination(const World& world, const StageState& st,
                          const std::vector<ContactEvent>& contacts,
                          long episode_steps, const SimClock& clock);

}  // namespace egopush
