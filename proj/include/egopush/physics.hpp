#pragma once

#include <vector>

#include "egopush/world.hpp"

namespace egopush {

enum class ContactKind {
  RobotActive,
  RobotAnchor,
  RobotObstacle,
  ActiveAnchor,
  ActiveObstacle,
  ObjectObject
};

// Unordered pair, stored with a_id < b_id. Robot is id 0.
struct ContactEvent {
  int a_id = 0;
  int b_id = 0;
  ContactKind kind = ContactKind::ObjectObject;
};

struct PdGains {
  double kp = 20.0;
  double kd = 1.0;
  bool passthrough = false;
};

struct PhysicsParams {
  double mu_ground = 0.4;
  double mu_push = 0.3;
  double box_mass = 0.5;
  double robot_mass = 1.0;
  double robot_inertia = 0.004;
  double track_width = 0.16;
  double max_v = 0.4;
  double max_w = 2.84;
  double gravity = 9.81;
  double slop = 0.0005;
  int solver_iters = 16;
  double spin_radius_frac = 0.4;
  PdGains pd;
};

// Action in [-1,1]^2 (clamped here) to (v, omega).
Vec2 action_to_command(const Vec2& action, const PhysicsParams& p);

Vec2 command_to_wheels(double v, double omega, double track_width);
Vec2 wheels_to_command(const Vec2& wheels, double track_width);

// One tracking update for both wheels. prev_error is caller-owned state.
Vec2 pd_track(const Vec2& target, const Vec2& current, Vec2& prev_error,
              const PdGains& gains, double dt);

// --- collision layer (exposed for oracles and the solver tests) ---

struct Collider {
  bool is_disc = false;
  std::vector<Vec2> verts;  // world space, CCW (polygons)
  Vec2 center = Vec2::Zero();
  double radius = 0.0;  // disc radius, or bounding radius for polygons
  int body = -1;        // solver body index
  int owner_id = 0;     // 0 robot, otherwise object id
};

Collider make_polygon_collider(const std::vector<Vec2>& local,
                               const Pose2& pose);
Collider make_disc_collider(double radius, const Pose2& pose);
std::vector<Collider> world_colliders(const World& world);

bool convex_overlap(const Collider& a, const Collider& b);

struct ContactPoint {
  Vec2 point = Vec2::Zero();
  double depth = 0.0;
};

struct Manifold {
  int a = -1, b = -1;        // solver body indices
  int a_owner = 0, b_owner = 0;
  Vec2 normal = Vec2::Zero();  // from a to b
  ContactPoint pts[2];
  int n_pts = 0;
};

bool collide(const Collider& a, const Collider& b, Manifold& out);

struct SolverBody {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  double w = 0.0;
  double inv_m = 0.0;
  double inv_I = 0.0;
};

// Velocity-level impulses, restitution 0, Coulomb friction. Two-point
// manifolds use a direct block solve so symmetric pushes stay symmetric.
void solve_contacts(std::vector<SolverBody>& bodies,
                    const std::vector<Manifold>& manifolds, double mu,
                    int iters);

// Moment of inertia of the footprint about its centroid.
double shape_inertia(const ObjectShape& shape, double mass);

// --- stepping ---

// Integrates `decimation` substeps of robot kinematics + contact
// resolution. Returns the deduplicated contact events seen during the step.
// Throws on non-finite state.
std::vector<ContactEvent> step_physics(World& world, const Vec2& target_wheels,
                                       const SimClock& clock,
                                       const PhysicsParams& params);

std::vector<ContactEvent> query_collisions(const World& world);

ContactKind classify_contact(const World& world, int a_id, int b_id);
bool is_terminal_collision(const std::vector<ContactEvent>& events);

// Maximum penetration depth over all current contacts (tests).
double max_penetration(const World& world);

}  // namespace egopush
