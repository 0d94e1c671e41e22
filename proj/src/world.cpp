#include "egopush/world.hpp"

#include <algorithm>
#include <cmath>

#include "egopush/rng.hpp"

namespace egopush {

std::vector<Vec2> ObjectShape::footprint_polygon() const {
  switch (kind) {
    case ShapeKind::Cube: {
      double h = size / 2.0;
      return {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
    }
    case ShapeKind::Prism: {
      // Equilateral triangle, one vertex on +x.
      double r = size / std::sqrt(3.0);
      std::vector<Vec2> v;
      for (int i = 0; i < 3; ++i) {
        double a = 2.0 * kPi * i / 3.0;
        v.push_back({r * std::cos(a), r * std::sin(a)});
      }
      return v;
    }
    case ShapeKind::Cylinder:
      return {};
  }
  throw std::runtime_error("unsupported shape kind");
}

double ObjectShape::footprint_radius() const {
  switch (kind) {
    case ShapeKind::Cube:
      return size / 2.0 * std::sqrt(2.0);
    case ShapeKind::Cylinder:
      return size / 2.0;
    case ShapeKind::Prism:
      return size / std::sqrt(3.0);
  }
  throw std::runtime_error("unsupported shape kind");
}

double ObjectShape::yaw_symmetry() const {
  switch (kind) {
    case ShapeKind::Cube:
      return kPi / 2.0;
    case ShapeKind::Cylinder:
      return 0.0;
    case ShapeKind::Prism:
      return 2.0 * kPi / 3.0;
  }
  throw std::runtime_error("unsupported shape kind");
}

ObjectShape shape_from_name(const std::string& name) {
  if (name == "cube") return ObjectShape::cube();
  if (name == "cylinder") return ObjectShape::cylinder();
  if (name == "prism") return ObjectShape::prism();
  throw std::runtime_error("unknown shape: " + name);
}

std::string shape_name(const ObjectShape& s) {
  switch (s.kind) {
    case ShapeKind::Cube:
      return "cube";
    case ShapeKind::Cylinder:
      return "cylinder";
    case ShapeKind::Prism:
      return "prism";
  }
  return "?";
}

Formation formation_from_name(const std::string& name) {
  if (name == "pair") return Formation::Pair;
  if (name == "cross") return Formation::Cross;
  if (name == "line") return Formation::Line;
  throw std::runtime_error("unknown formation: " + name);
}

std::string formation_name(Formation f) {
  switch (f) {
    case Formation::Pair:
      return "pair";
    case Formation::Cross:
      return "cross";
    case Formation::Line:
      return "line";
  }
  return "?";
}

void TaskSpec::validate() const {
  if (formation == Formation::Cross && n_objects != 5)
    throw std::runtime_error("cross formation requires 5 objects");
  if (formation == Formation::Pair && n_objects != 2)
    throw std::runtime_error("pair formation requires 2 objects");
  if (formation == Formation::Line && (n_objects < 2 || n_objects > 5))
    throw std::runtime_error("line formation requires 2..5 objects");
  if (static_cast<int>(shapes.size()) != n_objects)
    throw std::runtime_error("shapes list must match n_objects");
  double max_r = 0.0;
  for (const auto& s : shapes) max_r = std::max(max_r, s.footprint_radius());
  if (spacing <= max_r)
    throw std::runtime_error("spacing must exceed the largest footprint radius");
  if (arena_radius <= 2.0 * spacing)
    throw std::runtime_error("arena too small for the formation");
}

TaskSpec TaskSpec::make(Formation f, const ObjectShape& shape, double spacing,
                        double arena_radius) {
  TaskSpec t;
  t.formation = f;
  t.n_objects = (f == Formation::Pair) ? 2 : 5;
  t.spacing = spacing;
  t.arena_radius = arena_radius;
  t.shapes.assign(t.n_objects, shape);
  t.validate();
  return t;
}

StageScript build_stage_script(const TaskSpec& task) {
  StageScript script;
  switch (task.formation) {
    case Formation::Pair:
      script.stages.push_back({2, Pose2(task.spacing, 0.0, 0.0)});
      break;
    case Formation::Cross: {
      const Vec2 slots[4] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
      for (int i = 0; i < task.n_objects - 1; ++i)
        script.stages.push_back(
            {i + 2, Pose2(task.spacing * slots[i].x(),
                          task.spacing * slots[i].y(), 0.0)});
      break;
    }
    case Formation::Line:
      for (int i = 0; i < task.n_objects - 1; ++i)
        script.stages.push_back({i + 2, Pose2(task.spacing * (i + 1), 0.0, 0.0)});
      break;
  }
  return script;
}

std::vector<Vec2> RobotState::body_polygon_local() const {
  double h = kBodySize / 2.0;
  return {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
}

std::vector<Vec2> RobotState::pusher_polygon_local() const {
  double x0 = kBodySize / 2.0;
  double x1 = x0 + kPusherLength;
  double w = kPusherWidth / 2.0;
  return {{x1, w}, {x0, w}, {x0, -w}, {x1, -w}};
}

double RobotState::footprint_radius() const {
  double x1 = kBodySize / 2.0 + kPusherLength;
  double w = kPusherWidth / 2.0;
  return std::sqrt(x1 * x1 + w * w);
}

SceneObject& World::object_by_id(int id) {
  for (auto& o : objects)
    if (o.id == id) return o;
  throw std::runtime_error("no object with id " + std::to_string(id));
}

const SceneObject& World::object_by_id(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return o;
  throw std::runtime_error("no object with id " + std::to_string(id));
}

const SceneObject* World::find_role(Role r) const {
  for (const auto& o : objects)
    if (o.role == r) return &o;
  return nullptr;
}

int World::active_id() const {
  const SceneObject* o = find_role(Role::Active);
  return o ? o->id : -1;
}

int World::anchor_id() const {
  const SceneObject* o = find_role(Role::Anchor);
  return o ? o->id : -1;
}

std::vector<int> World::obstacle_ids() const {
  std::vector<int> ids;
  for (const auto& o : objects)
    if (o.role == Role::Obstacle) ids.push_back(o.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void World::assign_roles(int stage_idx) {
  if (stage_idx < 0 || stage_idx >= script.n_stages())
    throw std::runtime_error("stage index out of range");
  int active = script.stages[stage_idx].active_id;
  for (auto& o : objects) {
    if (o.id == 1)
      o.role = Role::Anchor;
    else if (o.id == active)
      o.role = Role::Active;
    else
      o.role = Role::Obstacle;
  }
}

namespace {

// Point at parameter t in [0,1) along the closed polygon boundary,
// measured by arc length from vertex 0.
Vec2 perimeter_point(const std::vector<Vec2>& poly, double t) {
  int n = static_cast<int>(poly.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += (poly[(i + 1) % n] - poly[i]).norm();
  double target = t * total;
  for (int i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    double len = (b - a).norm();
    if (target <= len || i == n - 1) {
      double f = len > 0.0 ? target / len : 0.0;
      return a + f * (b - a);
    }
    target -= len;
  }
  return poly[0];
}

}  // namespace

KeypointSet canonical_keypoints(const ObjectShape& shape, int k) {
  if (k < 4) throw std::runtime_error("canonical_keypoints: k must be >= 4");
  int n_top = k / 2;
  int n_bot = k - n_top;
  KeypointSet pts;
  pts.reserve(k);
  if (shape.kind == ShapeKind::Cylinder) {
    double r = shape.size / 2.0;
    for (int i = 0; i < n_bot; ++i) {
      double a = 2.0 * kPi * i / n_bot;
      pts.push_back({r * std::cos(a), r * std::sin(a), 0.0});
    }
    for (int i = 0; i < n_top; ++i) {
      double a = 2.0 * kPi * i / n_top;
      pts.push_back({r * std::cos(a), r * std::sin(a), shape.height});
    }
  } else {
    std::vector<Vec2> poly = shape.footprint_polygon();
    for (int i = 0; i < n_bot; ++i) {
      Vec2 p = perimeter_point(poly, static_cast<double>(i) / n_bot);
      pts.push_back({p.x(), p.y(), 0.0});
    }
    for (int i = 0; i < n_top; ++i) {
      Vec2 p = perimeter_point(poly, static_cast<double>(i) / n_top);
      pts.push_back({p.x(), p.y(), shape.height});
    }
  }
  return pts;
}

KeypointSet instantiate_reference(const Pose2& anchor_pose,
                                  const Pose2& rel_target,
                                  const ObjectShape& shape, int k) {
  Pose2 target = compose(anchor_pose, rel_target);
  return transform_keypoints(canonical_keypoints(shape, k), target);
}

World sample_initial_scene(const TaskSpec& task, std::uint64_t seed,
                           const SceneSampling& sampling) {
  task.validate();
  Rng rng(seed);
  World world;
  world.task = task;
  world.script = build_stage_script(task);

  struct Placed {
    Vec2 pos;
    double radius;
  };
  std::vector<Placed> placed;

  auto draw_pose = [&](double radius) -> Pose2 {
    // Uniform over the disc that keeps the footprint inside the arena.
    double rmax = task.arena_radius - radius;
    double r = rmax * std::sqrt(rng.uniform());
    double a = rng.uniform(-kPi, kPi);
    double yaw = rng.uniform(-kPi, kPi);
    return Pose2(r * std::cos(a), r * std::sin(a), yaw);
  };

  auto place = [&](double radius) -> Pose2 {
    for (int attempt = 0; attempt < sampling.max_retries; ++attempt) {
      Pose2 p = draw_pose(radius);
      bool ok = true;
      for (const auto& q : placed) {
        double need = radius + q.radius + sampling.clearance;
        if ((p.position() - q.pos).squaredNorm() < need * need) {
          ok = false;
          break;
        }
      }
      if (ok) {
        placed.push_back({p.position(), radius});
        return p;
      }
    }
    throw std::runtime_error("scene placement failed after " +
                             std::to_string(sampling.max_retries) +
                             " retries (seed " + std::to_string(seed) + ")");
  };

  for (int i = 0; i < task.n_objects; ++i) {
    SceneObject obj;
    obj.id = i + 1;
    obj.shape = task.shapes[i];
    obj.pose = place(obj.shape.footprint_radius());
    world.objects.push_back(obj);
  }
  world.robot.pose = place(world.robot.footprint_radius());
  world.assign_roles(0);
  return world;
}

}  // namespace egopush
