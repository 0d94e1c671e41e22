#pragma once

#include "egopush/physics.hpp"
#include "egopush/reward.hpp"
#include "egopush/world.hpp"

namespace egopush {

struct ExpertParams {
  double stage_distance = 0.30;   // staging point behind the box
  double align_tol = 0.1;         // rad, heading alignment before pushing
  double restage_lateral = 0.05;  // drift off the push line forcing a re-stage
  double cruise_speed = 0.38;     // m/s while navigating
  double push_speed = 0.25;       // m/s while pushing
  double near_speed = 0.1;        // m/s inside thresholds.d_th of the target
  double waypoint_leg = 0.45;     // length of the final approach segment
  double k_heading = 3.0;         // rad/s per rad
};

// Full-state go-behind-and-push controller (test oracle, not a learned
// policy). Plans the final approach along a symmetry-compatible direction so
// face-flush pushing also satisfies the yaw gate. Returns a policy action in
// [-1,1]^2.
Vec2 scripted_expert(const World& world, const StageRef& stage_ref,
                     const StageState& stage, const Thresholds& th,
                     const PhysicsParams& phys,
                     const ExpertParams& params = {});

}  // namespace egopush
