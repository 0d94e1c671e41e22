#include "egopush/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace egopush {

Vec2 action_to_command(const Vec2& action, const PhysicsParams& p) {
  double a0 = std::clamp(action.x(), -1.0, 1.0);
  double a1 = std::clamp(action.y(), -1.0, 1.0);
  return {p.max_v * a0, p.max_w * a1};
}

Vec2 command_to_wheels(double v, double omega, double track_width) {
  return {v - omega * track_width / 2.0, v + omega * track_width / 2.0};
}

Vec2 wheels_to_command(const Vec2& wheels, double track_width) {
  return {(wheels.x() + wheels.y()) / 2.0,
          (wheels.y() - wheels.x()) / track_width};
}

Vec2 pd_track(const Vec2& target, const Vec2& current, Vec2& prev_error,
              const PdGains& gains, double dt) {
  if (gains.passthrough) {
    prev_error = Vec2::Zero();
    return target;
  }
  // Lead-compensated P loop: kd scales the error-difference term inside the
  // kp gain, which keeps the discrete update stable at 60 Hz.
  Vec2 error = target - current;
  Vec2 lead = error + gains.kd * (error - prev_error);
  prev_error = error;
  return current + gains.kp * dt * lead;
}

Collider make_polygon_collider(const std::vector<Vec2>& local,
                               const Pose2& pose) {
  Collider c;
  c.is_disc = false;
  c.verts.reserve(local.size());
  Vec2 ctr = Vec2::Zero();
  for (const auto& p : local) {
    Vec2 w = pose.transform(p);
    c.verts.push_back(w);
    ctr += w;
  }
  c.center = ctr / static_cast<double>(local.size());
  double r = 0.0;
  for (const auto& v : c.verts) r = std::max(r, (v - c.center).norm());
  c.radius = r;
  return c;
}

Collider make_disc_collider(double radius, const Pose2& pose) {
  Collider c;
  c.is_disc = true;
  c.center = pose.position();
  c.radius = radius;
  return c;
}

std::vector<Collider> world_colliders(const World& world) {
  std::vector<Collider> cs;
  Collider body =
      make_polygon_collider(world.robot.body_polygon_local(), world.robot.pose);
  body.body = 0;
  body.owner_id = 0;
  cs.push_back(body);
  Collider pusher = make_polygon_collider(world.robot.pusher_polygon_local(),
                                          world.robot.pose);
  pusher.body = 0;
  pusher.owner_id = 0;
  cs.push_back(pusher);
  int bi = 1;
  for (const auto& obj : world.objects) {
    Collider c = obj.shape.is_disc()
                     ? make_disc_collider(obj.shape.size / 2.0, obj.pose)
                     : make_polygon_collider(obj.shape.footprint_polygon(),
                                             obj.pose);
    c.body = bi++;
    c.owner_id = obj.id;
    cs.push_back(c);
  }
  return cs;
}

namespace {

Vec2 edge_normal(const std::vector<Vec2>& v, int i) {
  int n = static_cast<int>(v.size());
  Vec2 d = v[(i + 1) % n] - v[i];
  Vec2 nrm(d.y(), -d.x());
  return nrm.normalized();
}

// Largest separation of b's vertices from a's faces; face index out.
double max_separation(const Collider& a, const Collider& b, int& face) {
  double best = -std::numeric_limits<double>::infinity();
  face = 0;
  int n = static_cast<int>(a.verts.size());
  for (int i = 0; i < n; ++i) {
    Vec2 nrm = edge_normal(a.verts, i);
    double min_proj = std::numeric_limits<double>::infinity();
    for (const auto& w : b.verts)
      min_proj = std::min(min_proj, nrm.dot(w - a.verts[i]));
    if (min_proj > best) {
      best = min_proj;
      face = i;
    }
  }
  return best;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b,
                              Vec2& closest) {
  Vec2 ab = b - a;
  double t = ab.squaredNorm() > 0.0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  closest = a + t * ab;
  return (p - closest).norm();
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& v) {
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    Vec2 nrm = edge_normal(v, i);
    if (nrm.dot(p - v[i]) > 0.0) return false;
  }
  return true;
}

struct ClipVertex {
  Vec2 v;
};

int clip_segment(const ClipVertex in[2], ClipVertex out[2], const Vec2& n,
                 double offset) {
  int count = 0;
  double d0 = n.dot(in[0].v) - offset;
  double d1 = n.dot(in[1].v) - offset;
  if (d0 <= 0.0) out[count++] = in[0];
  if (d1 <= 0.0) out[count++] = in[1];
  if (d0 * d1 < 0.0) {
    double t = d0 / (d0 - d1);
    out[count].v = in[0].v + t * (in[1].v - in[0].v);
    ++count;
  }
  return count;
}

bool collide_polygons(const Collider& a, const Collider& b, Manifold& out) {
  int face_a = 0, face_b = 0;
  double sep_a = max_separation(a, b, face_a);
  if (sep_a > 0.0) return false;
  double sep_b = max_separation(b, a, face_b);
  if (sep_b > 0.0) return false;

  const Collider* ref;
  const Collider* inc;
  int ref_face;
  bool flip;
  // Small bias keeps the reference choice stable frame to frame.
  if (sep_b > sep_a + 1e-10) {
    ref = &b;
    inc = &a;
    ref_face = face_b;
    flip = true;
  } else {
    ref = &a;
    inc = &b;
    ref_face = face_a;
    flip = false;
  }

  int rn = static_cast<int>(ref->verts.size());
  Vec2 ref_v1 = ref->verts[ref_face];
  Vec2 ref_v2 = ref->verts[(ref_face + 1) % rn];
  Vec2 ref_normal = edge_normal(ref->verts, ref_face);

  // Most anti-parallel incident face.
  int in_count = static_cast<int>(inc->verts.size());
  int inc_face = 0;
  double min_dot = std::numeric_limits<double>::infinity();
  for (int i = 0; i < in_count; ++i) {
    double d = ref_normal.dot(edge_normal(inc->verts, i));
    if (d < min_dot) {
      min_dot = d;
      inc_face = i;
    }
  }
  ClipVertex incident[2] = {{inc->verts[inc_face]},
                            {inc->verts[(inc_face + 1) % in_count]}};

  Vec2 tangent = (ref_v2 - ref_v1).normalized();
  ClipVertex clipped1[2], clipped2[2];
  if (clip_segment(incident, clipped1, -tangent, -tangent.dot(ref_v1)) < 2)
    return false;
  if (clip_segment(clipped1, clipped2, tangent, tangent.dot(ref_v2)) < 2)
    return false;

  out.n_pts = 0;
  out.normal = flip ? Vec2(-ref_normal) : ref_normal;
  for (int i = 0; i < 2; ++i) {
    double sep = ref_normal.dot(clipped2[i].v - ref_v1);
    if (sep <= 0.0) {
      ContactPoint cp;
      cp.point = clipped2[i].v;
      cp.depth = -sep;
      out.pts[out.n_pts++] = cp;
    }
  }
  return out.n_pts > 0;
}

bool collide_polygon_disc(const Collider& poly, const Collider& disc,
                          Manifold& out) {
  int n = static_cast<int>(poly.verts.size());
  if (point_in_polygon(disc.center, poly.verts)) {
    // Center inside: push out along the least-penetration face.
    double best = -std::numeric_limits<double>::infinity();
    int face = 0;
    for (int i = 0; i < n; ++i) {
      Vec2 nrm = edge_normal(poly.verts, i);
      double d = nrm.dot(disc.center - poly.verts[i]);
      if (d > best) {
        best = d;
        face = i;
      }
    }
    Vec2 nrm = edge_normal(poly.verts, face);
    out.normal = nrm;
    out.n_pts = 1;
    out.pts[0].point = disc.center - nrm * disc.radius;
    out.pts[0].depth = disc.radius - best;
    return true;
  }
  double best_dist = std::numeric_limits<double>::infinity();
  Vec2 best_closest = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    Vec2 closest;
    double d = point_segment_distance(disc.center, poly.verts[i],
                                      poly.verts[(i + 1) % n], closest);
    if (d < best_dist) {
      best_dist = d;
      best_closest = closest;
    }
  }
  if (best_dist >= disc.radius) return false;
  Vec2 nrm = (disc.center - best_closest);
  double len = nrm.norm();
  out.normal = len > 1e-12 ? Vec2(nrm / len) : Vec2(1.0, 0.0);
  out.n_pts = 1;
  out.pts[0].point = best_closest;
  out.pts[0].depth = disc.radius - best_dist;
  return true;
}

bool collide_discs(const Collider& a, const Collider& b, Manifold& out) {
  Vec2 d = b.center - a.center;
  double dist = d.norm();
  double r = a.radius + b.radius;
  if (dist >= r) return false;
  out.normal = dist > 1e-12 ? Vec2(d / dist) : Vec2(1.0, 0.0);
  out.n_pts = 1;
  out.pts[0].point = a.center + out.normal * a.radius;
  out.pts[0].depth = r - dist;
  return true;
}

}  // namespace

bool collide(const Collider& a, const Collider& b, Manifold& out) {
  // Broad phase.
  double rr = a.radius + b.radius;
  if ((a.center - b.center).squaredNorm() > rr * rr) return false;
  out.a = a.body;
  out.b = b.body;
  out.a_owner = a.owner_id;
  out.b_owner = b.owner_id;
  if (!a.is_disc && !b.is_disc) return collide_polygons(a, b, out);
  if (!a.is_disc && b.is_disc) return collide_polygon_disc(a, b, out);
  if (a.is_disc && !b.is_disc) {
    Manifold m;
    m.a = out.a;
    m.b = out.b;
    m.a_owner = out.a_owner;
    m.b_owner = out.b_owner;
    if (!collide_polygon_disc(b, a, m)) return false;
    out = m;
    out.a = a.body;
    out.b = b.body;
    out.a_owner = a.owner_id;
    out.b_owner = b.owner_id;
    out.normal = -out.normal;
    return true;
  }
  return collide_discs(a, b, out);
}

bool convex_overlap(const Collider& a, const Collider& b) {
  Manifold m;
  return collide(a, b, m);
}

namespace {

Vec2 velocity_at(const SolverBody& body, const Vec2& point) {
  Vec2 r = point - body.pos;
  return body.vel + Vec2(-body.w * r.y(), body.w * r.x());
}

void apply_impulse(SolverBody& body, const Vec2& impulse, const Vec2& point) {
  body.vel += body.inv_m * impulse;
  body.w += body.inv_I * cross2(point - body.pos, impulse);
}

struct ContactConstraint {
  const Manifold* m;
  double normal_mass[2];
  double tangent_mass[2];
  double jn[2] = {0.0, 0.0};
  double jt[2] = {0.0, 0.0};
  double k12 = 0.0;  // off-diagonal of the 2-point normal block
};

}  // namespace

void solve_contacts(std::vector<SolverBody>& bodies,
                    const std::vector<Manifold>& manifolds, double mu,
                    int iters) {
  std::vector<ContactConstraint> cons;
  cons.reserve(manifolds.size());
  for (const auto& m : manifolds) {
    ContactConstraint c{};
    c.m = &m;
    SolverBody& A = bodies[m.a];
    SolverBody& B = bodies[m.b];
    Vec2 n = m.normal;
    Vec2 t(-n.y(), n.x());
    for (int i = 0; i < m.n_pts; ++i) {
      Vec2 ra = m.pts[i].point - A.pos;
      Vec2 rb = m.pts[i].point - B.pos;
      double rna = cross2(ra, n), rnb = cross2(rb, n);
      double kn = A.inv_m + B.inv_m + A.inv_I * rna * rna + B.inv_I * rnb * rnb;
      c.normal_mass[i] = kn > 0.0 ? 1.0 / kn : 0.0;
      double rta = cross2(ra, t), rtb = cross2(rb, t);
      double kt = A.inv_m + B.inv_m + A.inv_I * rta * rta + B.inv_I * rtb * rtb;
      c.tangent_mass[i] = kt > 0.0 ? 1.0 / kt : 0.0;
    }
    if (m.n_pts == 2) {
      Vec2 ra1 = m.pts[0].point - A.pos, rb1 = m.pts[0].point - B.pos;
      Vec2 ra2 = m.pts[1].point - A.pos, rb2 = m.pts[1].point - B.pos;
      double rn1a = cross2(ra1, n), rn1b = cross2(rb1, n);
      double rn2a = cross2(ra2, n), rn2b = cross2(rb2, n);
      c.k12 = A.inv_m + B.inv_m + A.inv_I * rn1a * rn2a + B.inv_I * rn1b * rn2b;
    }
    cons.push_back(c);
  }

  for (int iter = 0; iter < iters; ++iter) {
    for (auto& c : cons) {
      const Manifold& m = *c.m;
      SolverBody& A = bodies[m.a];
      SolverBody& B = bodies[m.b];
      Vec2 n = m.normal;
      Vec2 t(-n.y(), n.x());

      // Normal impulses.
      if (m.n_pts == 1) {
        double vn = n.dot(velocity_at(B, m.pts[0].point) -
                          velocity_at(A, m.pts[0].point));
        double dj = -vn * c.normal_mass[0];
        double j0 = c.jn[0];
        c.jn[0] = std::max(j0 + dj, 0.0);
        dj = c.jn[0] - j0;
        apply_impulse(A, -dj * n, m.pts[0].point);
        apply_impulse(B, dj * n, m.pts[0].point);
      } else {
        // Direct 2x2 block solve (restitution 0). Keeps symmetric contacts
        // symmetric instead of ping-ponging between the two points.
        double k11 = c.normal_mass[0] > 0.0 ? 1.0 / c.normal_mass[0] : 0.0;
        double k22 = c.normal_mass[1] > 0.0 ? 1.0 / c.normal_mass[1] : 0.0;
        double k12 = c.k12;
        double vn1 = n.dot(velocity_at(B, m.pts[0].point) -
                           velocity_at(A, m.pts[0].point));
        double vn2 = n.dot(velocity_at(B, m.pts[1].point) -
                           velocity_at(A, m.pts[1].point));
        // b = residual if accumulated impulses were removed.
        double b1 = vn1 - (c.jn[0] * k11 + c.jn[1] * k12);
        double b2 = vn2 - (c.jn[0] * k12 + c.jn[1] * k22);
        double x1 = 0.0, x2 = 0.0;
        double det = k11 * k22 - k12 * k12;
        bool solved = false;
        if (std::abs(det) > 1e-12) {
          x1 = (-b1 * k22 + b2 * k12) / det;
          x2 = (b1 * k12 - b2 * k11) / det;
          if (x1 >= 0.0 && x2 >= 0.0) solved = true;
        }
        if (!solved) {
          // Point 1 only.
          x1 = k11 > 0.0 ? -b1 / k11 : 0.0;
          x2 = 0.0;
          if (x1 >= 0.0 && b2 + k12 * x1 >= 0.0) {
            solved = true;
          }
        }
        if (!solved) {
          // Point 2 only.
          x1 = 0.0;
          x2 = k22 > 0.0 ? -b2 / k22 : 0.0;
          if (x2 >= 0.0 && b1 + k12 * x2 >= 0.0) {
            solved = true;
          }
        }
        if (!solved) {
          x1 = 0.0;
          x2 = 0.0;
        }
        double d1 = x1 - c.jn[0];
        double d2 = x2 - c.jn[1];
        c.jn[0] = x1;
        c.jn[1] = x2;
        apply_impulse(A, -d1 * n, m.pts[0].point);
        apply_impulse(B, d1 * n, m.pts[0].point);
        apply_impulse(A, -d2 * n, m.pts[1].point);
        apply_impulse(B, d2 * n, m.pts[1].point);
      }

      // Friction, clamped by the accumulated normal impulse.
      for (int i = 0; i < m.n_pts; ++i) {
        double vt = t.dot(velocity_at(B, m.pts[i].point) -
                          velocity_at(A, m.pts[i].point));
        double dj = -vt * c.tangent_mass[i];
        double max_f = mu * c.jn[i];
        double j0 = c.jt[i];
        c.jt[i] = std::clamp(j0 + dj, -max_f, max_f);
        dj = c.jt[i] - j0;
        apply_impulse(A, -dj * t, m.pts[i].point);
        apply_impulse(B, dj * t, m.pts[i].point);
      }
    }
  }
}

double shape_inertia(const ObjectShape& shape, double mass) {
  if (shape.is_disc()) {
    double r = shape.size / 2.0;
    return 0.5 * mass * r * r;
  }
  // Uniform polygon about its centroid (footprints are centered already).
  std::vector<Vec2> v = shape.footprint_polygon();
  int n = static_cast<int>(v.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& p0 = v[i];
    const Vec2& p1 = v[(i + 1) % n];
    double cr = cross2(p0, p1);
    num += cr * (p0.dot(p0) + p0.dot(p1) + p1.dot(p1));
    den += cr;
  }
  return mass * num / (6.0 * den);
}

namespace {

void apply_ground_friction(SceneObject& obj, const PhysicsParams& p,
                           double dt) {
  double dv = p.mu_ground * p.gravity * dt;
  double speed = obj.lin_vel.norm();
  if (speed <= dv)
    obj.lin_vel.setZero();
  else
    obj.lin_vel -= dv * (obj.lin_vel / speed);

  double inertia = shape_inertia(obj.shape, p.box_mass);
  double k2 = inertia / p.box_mass;
  double spin_r = p.spin_radius_frac * obj.shape.footprint_radius();
  double dw = p.mu_ground * p.gravity * spin_r / k2 * dt;
  if (std::abs(obj.ang_vel) <= dw)
    obj.ang_vel = 0.0;
  else
    obj.ang_vel -= dw * (obj.ang_vel > 0.0 ? 1.0 : -1.0);
}

double wrap_if_needed(double a) {
  return (a > kPi || a <= -kPi) ? wrap_angle(a) : a;
}

void gather_manifolds(const World& world,
                      const std::vector<Collider>& colliders,
                      std::vector<Manifold>& out) {
  out.clear();
  int nc = static_cast<int>(colliders.size());
  for (int i = 0; i < nc; ++i) {
    for (int j = i + 1; j < nc; ++j) {
      if (colliders[i].body == colliders[j].body) continue;  // robot's own
      Manifold m;
      if (collide(colliders[i], colliders[j], m)) out.push_back(m);
    }
  }
  (void)world;
}

void add_events(const World& world, const std::vector<Manifold>& manifolds,
                std::vector<ContactEvent>& events) {
  for (const auto& m : manifolds) {
    int a = std::min(m.a_owner, m.b_owner);
    int b = std::max(m.a_owner, m.b_owner);
    bool seen = false;
    for (const auto& e : events)
      if (e.a_id == a && e.b_id == b) {
        seen = true;
        break;
      }
    if (!seen) events.push_back({a, b, classify_contact(world, a, b)});
  }
}

}  // namespace

ContactKind classify_contact(const World& world, int a_id, int b_id) {
  auto role_of = [&](int id) { return world.object_by_id(id).role; };
  if (a_id == 0) {
    switch (role_of(b_id)) {
      case Role::Active:
        return ContactKind::RobotActive;
      case Role::Anchor:
        return ContactKind::RobotAnchor;
      case Role::Obstacle:
        return ContactKind::RobotObstacle;
    }
  }
  Role ra = role_of(a_id), rb = role_of(b_id);
  auto has = [&](Role r) { return ra == r || rb == r; };
  if (has(Role::Active) && has(Role::Anchor)) return ContactKind::ActiveAnchor;
  if (has(Role::Active) && has(Role::Obstacle))
    return ContactKind::ActiveObstacle;
  return ContactKind::ObjectObject;
}

bool is_terminal_collision(const std::vector<ContactEvent>& events) {
  for (const auto& e : events)
    if (e.kind == ContactKind::RobotObstacle ||
        e.kind == ContactKind::ActiveObstacle)
      return true;
  return false;
}

std::vector<ContactEvent> step_physics(World& world, const Vec2& target_wheels,
                                       const SimClock& clock,
                                       const PhysicsParams& params) {
  std::vector<ContactEvent> events;
  std::vector<Manifold> manifolds;
  const double dt = clock.dt;
  const int n_obj = static_cast<int>(world.objects.size());

  for (int sub = 0; sub < clock.decimation; ++sub) {
    RobotState& rbt = world.robot;
    rbt.wheel_speeds = pd_track(target_wheels, rbt.wheel_speeds,
                                rbt.pd_prev_error, params.pd, dt);
    Vec2 cmd = wheels_to_command(rbt.wheel_speeds, params.track_width);

    for (auto& obj : world.objects) apply_ground_friction(obj, params, dt);

    // Solver bodies: 0 = robot (wheel-driven velocity), 1.. = objects.
    std::vector<SolverBody> bodies(1 + n_obj);
    double cy = std::cos(rbt.pose.yaw), sy = std::sin(rbt.pose.yaw);
    bodies[0].pos = rbt.pose.position();
    bodies[0].vel = Vec2(cmd.x() * cy, cmd.x() * sy);
    bodies[0].w = cmd.y();
    bodies[0].inv_m = 1.0 / params.robot_mass;
    bodies[0].inv_I = 1.0 / params.robot_inertia;
    for (int i = 0; i < n_obj; ++i) {
      const SceneObject& obj = world.objects[i];
      bodies[1 + i].pos = obj.pose.position();
      bodies[1 + i].vel = obj.lin_vel;
      bodies[1 + i].w = obj.ang_vel;
      bodies[1 + i].inv_m = 1.0 / params.box_mass;
      bodies[1 + i].inv_I = 1.0 / shape_inertia(obj.shape, params.box_mass);
    }

    std::vector<Collider> colliders = world_colliders(world);
    gather_manifolds(world, colliders, manifolds);
    if (!manifolds.empty())
      solve_contacts(bodies, manifolds, params.mu_push, params.solver_iters);
    add_events(world, manifolds, events);

    // Integrate.
    rbt.pose.x += bodies[0].vel.x() * dt;
    rbt.pose.y += bodies[0].vel.y() * dt;
    rbt.pose.yaw = wrap_if_needed(rbt.pose.yaw + bodies[0].w * dt);
    for (int i = 0; i < n_obj; ++i) {
      SceneObject& obj = world.objects[i];
      obj.lin_vel = bodies[1 + i].vel;
      obj.ang_vel = bodies[1 + i].w;
      obj.pose.x += obj.lin_vel.x() * dt;
      obj.pose.y += obj.lin_vel.y() * dt;
      obj.pose.yaw = wrap_if_needed(obj.pose.yaw + obj.ang_vel * dt);
    }

    // Positional projection: remove residual overlap, inverse-mass weighted.
    for (int pass = 0; pass < 4; ++pass) {
      std::vector<Collider> cs = world_colliders(world);
      gather_manifolds(world, cs, manifolds);
      if (manifolds.empty()) break;
      add_events(world, manifolds, events);
      bool any = false;
      for (const auto& m : manifolds) {
        double depth = 0.0;
        for (int i = 0; i < m.n_pts; ++i)
          depth = std::max(depth, m.pts[i].depth);
        double corr = depth - params.slop;
        if (corr <= 0.0) continue;
        any = true;
        double inv_ma = bodies[m.a].inv_m;
        double inv_mb = bodies[m.b].inv_m;
        double total = inv_ma + inv_mb;
        if (total <= 0.0) continue;
        Vec2 shift = m.normal * corr;
        auto move = [&](int body, const Vec2& d) {
          if (body == 0) {
            world.robot.pose.x += d.x();
            world.robot.pose.y += d.y();
          } else {
            world.objects[body - 1].pose.x += d.x();
            world.objects[body - 1].pose.y += d.y();
          }
        };
        move(m.a, -shift * (inv_ma / total));
        move(m.b, shift * (inv_mb / total));
      }
      if (!any) break;
    }
  }

  // Fail fast on numerical blowup.
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(world.robot.pose.x) || !finite(world.robot.pose.y) ||
      !finite(world.robot.pose.yaw))
    throw std::runtime_error("physics: non-finite robot state");
  for (const auto& obj : world.objects)
    if (!finite(obj.pose.x) || !finite(obj.pose.y) || !finite(obj.pose.yaw) ||
        !obj.lin_vel.allFinite() || !finite(obj.ang_vel))
      throw std::runtime_error("physics: non-finite object state");

  return events;
}

std::vector<ContactEvent> query_collisions(const World& world) {
  std::vector<Collider> cs = world_colliders(world);
  std::vector<Manifold> manifolds;
  gather_manifolds(world, cs, manifolds);
  std::vector<ContactEvent> events;
  add_events(world, manifolds, events);
  return events;
}

double max_penetration(const World& world) {
  std::vector<Collider> cs = world_colliders(world);
  std::vector<Manifold> manifolds;
  gather_manifolds(world, cs, manifolds);
  double depth = 0.0;
  for (const auto& m : manifolds)
    for (int i = 0; i < m.n_pts; ++i)
      depth = std::max(depth, m.pts[i].depth);
  return depth;
}

}  // namespace egopush
