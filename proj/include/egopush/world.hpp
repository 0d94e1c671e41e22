#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "egopush/geometry.hpp"

namespace egopush {

enum class ShapeKind { Cube, Cylinder, Prism };

// Planar footprint + height. size is the cube edge, cylinder diameter or
// prism (equilateral) side length.
struct ObjectShape {
  ShapeKind kind = ShapeKind::Cube;
  double size = 0.15;
  double height = 0.15;

  static ObjectShape cube(double s = 0.15) { return {ShapeKind::Cube, s, s}; }
  static ObjectShape cylinder(double d = 0.15, double h = 0.15) {
    return {ShapeKind::Cylinder, d, h};
  }
  static ObjectShape prism(double s = 0.15, double h = 0.15) {
    return {ShapeKind::Prism, s, h};
  }

  bool is_disc() const { return kind == ShapeKind::Cylinder; }

  // Footprint polygon in the local frame (CCW); empty for discs.
  std::vector<Vec2> footprint_polygon() const;
  double footprint_radius() const;  // circumradius of the footprint

  // Rotational symmetry of the footprint: period in radians, 0 meaning
  // fully symmetric (disc).
  double yaw_symmetry() const;
};

ObjectShape shape_from_name(const std::string& name);
std::string shape_name(const ObjectShape& s);

enum class Role { Active, Anchor, Obstacle };

struct SceneObject {
  int id = 0;  // 1-based; 0 is reserved for the robot / background
  Role role = Role::Obstacle;
  ObjectShape shape;
  Pose2 pose;
  Vec2 lin_vel = Vec2::Zero();
  double ang_vel = 0.0;
};

enum class Formation { Pair, Cross, Line };

Formation formation_from_name(const std::string& name);
std::string formation_name(Formation f);

struct TaskSpec {
  Formation formation = Formation::Pair;
  int n_objects = 2;
  double spacing = 0.30;       // center-to-center slot offset from anchor
  double arena_radius = 1.5;
  std::vector<ObjectShape> shapes;  // size n_objects; [0] is the anchor

  void validate() const;
  static TaskSpec make(Formation f, const ObjectShape& shape,
                       double spacing = 0.30, double arena_radius = 1.5);
};

// One reach-then-place cycle: which object to push and where its target
// sits relative to the anchor. The relative targets depend only on the
// formation, never on the episode.
struct StageRef {
  int active_id = 0;
  Pose2 rel_target;
};

struct StageScript {
  std::vector<StageRef> stages;
  int n_stages() const { return static_cast<int>(stages.size()); }
};

StageScript build_stage_script(const TaskSpec& task);

// Differential-drive base with a front pusher. Footprint boxes are in the
// robot frame: body centered on the pose, pusher ahead of it.
struct RobotState {
  Pose2 pose;
  Vec2 wheel_speeds = Vec2::Zero();   // (left, right) m/s, current
  Vec2 commanded = Vec2::Zero();      // (v, omega) after clamping
  Vec2 pd_prev_error = Vec2::Zero();  // per-wheel tracking error memory

  static constexpr double kBodySize = 0.14;
  static constexpr double kPusherLength = 0.075;
  static constexpr double kPusherWidth = 0.14;

  std::vector<Vec2> body_polygon_local() const;
  std::vector<Vec2> pusher_polygon_local() const;
  double footprint_radius() const;
};

struct SimClock {
  double dt = 1.0 / 60.0;
  int decimation = 6;
  int episode_limit = 1000;  // policy steps

  double policy_dt() const { return dt * decimation; }
};

struct World {
  RobotState robot;
  std::vector<SceneObject> objects;
  TaskSpec task;
  StageScript script;

  SceneObject& object_by_id(int id);
  const SceneObject& object_by_id(int id) const;
  const SceneObject* find_role(Role r) const;
  int active_id() const;
  int anchor_id() const;
  std::vector<int> obstacle_ids() const;  // ascending id order

  // Assign roles for the given stage index: scripted object active, object 1
  // anchor, everything else obstacle.
  void assign_roles(int stage_idx);
};

// K surface keypoints in the object's local frame. Cube with k=8 gives
// exactly the 8 corners; other shapes walk the footprint rims at two
// heights (z = 0 and z = height).
KeypointSet canonical_keypoints(const ObjectShape& shape, int k);

// World-frame keypoints of the virtual target configuration: canonical
// keypoints under (anchor_pose o rel_target).
KeypointSet instantiate_reference(const Pose2& anchor_pose,
                                  const Pose2& rel_target,
                                  const ObjectShape& shape, int k);

struct SceneSampling {
  double clearance = 0.05;  // min footprint gap between any two bodies
  int max_retries = 1000;
};

// Deterministic randomized reset. Throws (echoing the seed) if placement
// fails after max_retries draws for some body.
World sample_initial_scene(const TaskSpec& task, std::uint64_t seed,
                           const SceneSampling& sampling = {});

}  // namespace egopush
