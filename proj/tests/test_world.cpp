#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "egopush/physics.hpp"
#include "egopush/rng.hpp"
#include "egopush/world.hpp"

using namespace egopush;

namespace {

// Independent 2-D homogeneous-transform oracle.
Eigen::Matrix3d pose_matrix(const Pose2& p) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  double c = std::cos(p.yaw), s = std::sin(p.yaw);
  m(0, 0) = c;
  m(0, 1) = -s;
  m(1, 0) = s;
  m(1, 1) = c;
  m(0, 2) = p.x;
  m(1, 2) = p.y;
  return m;
}

}  // namespace

TEST_SUITE("worldmodel") {

TEST_CASE("yaw wrapping stays in (-pi, pi]") {
  CHECK(Pose2(0, 0, kPi).yaw == doctest::Approx(kPi));
  CHECK(Pose2(0, 0, -kPi).yaw == doctest::Approx(kPi));
  CHECK(Pose2(0, 0, 3 * kPi).yaw == doctest::Approx(kPi));
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    double a = rng.uniform(-50.0, 50.0);
    double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::abs(std::sin(w) - std::sin(a)) < 1e-9);
    CHECK(std::abs(std::cos(w) - std::cos(a)) < 1e-9);
  }
}

TEST_CASE("cube keypoints with k=8 are exactly the corners") {
  KeypointSet pts = canonical_keypoints(ObjectShape::cube(0.15), 8);
  REQUIRE(pts.size() == 8);
  std::set<std::array<int, 3>> seen;
  for (const auto& p : pts) {
    CHECK(std::abs(std::abs(p.x()) - 0.075) < 1e-12);
    CHECK(std::abs(std::abs(p.y()) - 0.075) < 1e-12);
    CHECK((std::abs(p.z()) < 1e-12 || std::abs(p.z() - 0.15) < 1e-12));
    seen.insert({p.x() > 0 ? 1 : -1, p.y() > 0 ? 1 : -1, p.z() > 0.07 ? 1 : 0});
  }
  CHECK(seen.size() == 8);  // all distinct corners
}

TEST_CASE("cylinder keypoints lie on the rims with closed-form chords") {
  ObjectShape cyl = ObjectShape::cylinder();
  KeypointSet pts = canonical_keypoints(cyl, 8);
  REQUIRE(pts.size() == 8);
  double r = cyl.size / 2.0;
  for (const auto& p : pts) {
    CHECK(std::hypot(p.x(), p.y()) == doctest::Approx(r).epsilon(1e-12));
    CHECK((p.z() == 0.0 || p.z() == cyl.height));
  }
  // Chord between adjacent points on one rim: 2 r sin(pi/4).
  double expect = 2.0 * r * std::sin(kPi / 4.0);
  CHECK((pts[1] - pts[0]).norm() == doctest::Approx(expect).epsilon(1e-12));
  CHECK((pts[5] - pts[4]).norm() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("keypoints are deterministic and identity transform is a no-op") {
  ObjectShape sh = ObjectShape::prism();
  KeypointSet a = canonical_keypoints(sh, 9);
  KeypointSet b = canonical_keypoints(sh, 9);
  REQUIRE(a.size() == 9);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  KeypointSet c = transform_keypoints(a, Pose2());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK((a[i] - c[i]).norm() == doctest::Approx(0.0));
}

TEST_CASE("canonical_keypoints rejects k < 4") {
  CHECK_THROWS(canonical_keypoints(ObjectShape::cube(), 3));
}

TEST_CASE("instantiate_reference composes anchor and relative target") {
  ObjectShape cube = ObjectShape::cube(0.15);
  SUBCASE("pure translation") {
    KeypointSet pts =
        instantiate_reference(Pose2(), Pose2(0.3, 0, 0), cube, 8);
    Vec3 c = centroid(pts);
    CHECK(c.x() == doctest::Approx(0.3));
    CHECK(c.y() == doctest::Approx(0.0));
  }
  SUBCASE("anchor rotation moves the slot") {
    KeypointSet pts =
        instantiate_reference(Pose2(0, 0, kPi / 2), Pose2(0.3, 0, 0), cube, 8);
    Vec3 c = centroid(pts);
    CHECK(c.x() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c.y() == doctest::Approx(0.3));
  }
  SUBCASE("random pairs match the homogeneous-transform oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      Pose2 anchor(rng.uniform(-1, 1), rng.uniform(-1, 1),
                   rng.uniform(-kPi, kPi));
      Pose2 rel(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                rng.uniform(-kPi, kPi));
      KeypointSet pts = instantiate_reference(anchor, rel, cube, 8);
      Eigen::Matrix3d m = pose_matrix(anchor) * pose_matrix(rel);
      KeypointSet local = canonical_keypoints(cube, 8);
      for (std::size_t i = 0; i < local.size(); ++i) {
        Eigen::Vector3d h(local[i].x(), local[i].y(), 1.0);
        Eigen::Vector3d w = m * h;
        CHECK(pts[i].x() == doctest::Approx(w.x()).epsilon(1e-12));
        CHECK(pts[i].y() == doctest::Approx(w.y()).epsilon(1e-12));
        CHECK(pts[i].z() == doctest::Approx(local[i].z()));
      }
    }
  }
}

TEST_CASE("stage scripts are formation-invariant and well-formed") {
  TaskSpec cross = TaskSpec::make(Formation::Cross, ObjectShape::cube());
  StageScript s1 = build_stage_script(cross);
  StageScript s2 = build_stage_script(cross);
  REQUIRE(s1.n_stages() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(s1.stages[i].active_id == s2.stages[i].active_id);
    CHECK(s1.stages[i].rel_target.x == s2.stages[i].rel_target.x);
    CHECK(s1.stages[i].rel_target.y == s2.stages[i].rel_target.y);
  }
  CHECK(build_stage_script(TaskSpec::make(Formation::Pair, ObjectShape::cube()))
            .n_stages() == 1);
  TaskSpec line = TaskSpec::make(Formation::Line, ObjectShape::cube());
  StageScript ls = build_stage_script(line);
  REQUIRE(ls.n_stages() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(ls.stages[i].rel_target.x ==
          doctest::Approx(line.spacing * (i + 1)));
}

TEST_CASE("task validation rejects bad combos") {
  TaskSpec t = TaskSpec::make(Formation::Cross, ObjectShape::cube());
  t.n_objects = 4;
  t.shapes.resize(4);
  CHECK_THROWS(t.validate());
  TaskSpec p = TaskSpec::make(Formation::Pair, ObjectShape::cube());
  p.spacing = 0.05;  // below the cube footprint radius
  CHECK_THROWS(p.validate());
}

TEST_CASE("same seed gives a bit-identical scene") {
  TaskSpec task = TaskSpec::make(Formation::Cross, ObjectShape::cube());
  World a = sample_initial_scene(task, 1234);
  World b = sample_initial_scene(task, 1234);
  REQUIRE(a.objects.size() == b.objects.size());
  CHECK(a.robot.pose.x == b.robot.pose.x);
  CHECK(a.robot.pose.y == b.robot.pose.y);
  CHECK(a.robot.pose.yaw == b.robot.pose.yaw);
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    CHECK(a.objects[i].pose.x == b.objects[i].pose.x);
    CHECK(a.objects[i].pose.y == b.objects[i].pose.y);
    CHECK(a.objects[i].pose.yaw == b.objects[i].pose.yaw);
  }
}

TEST_CASE("roles partition: one active, one anchor, rest obstacles") {
  TaskSpec task = TaskSpec::make(Formation::Cross, ObjectShape::cube());
  World w = sample_initial_scene(task, 5);
  int n_active = 0, n_anchor = 0, n_obs = 0;
  for (const auto& o : w.objects) {
    if (o.role == Role::Active) ++n_active;
    if (o.role == Role::Anchor) ++n_anchor;
    if (o.role == Role::Obstacle) ++n_obs;
  }
  CHECK(n_active == 1);
  CHECK(n_anchor == 1);
  CHECK(n_obs == 3);

  World p = sample_initial_scene(TaskSpec::make(Formation::Pair,
                                                ObjectShape::cube()),
                                 5);
  CHECK(p.obstacle_ids().empty());
  CHECK(p.active_id() == 2);
  CHECK(p.anchor_id() == 1);
}

TEST_CASE("sampled scenes never overlap (separating-axis oracle, 1e4 seeds)") {
  TaskSpec task = TaskSpec::make(Formation::Cross, ObjectShape::cube());
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    World w = sample_initial_scene(task, seed);
    std::vector<Collider> cs = world_colliders(w);
    for (std::size_t i = 0; i < cs.size(); ++i)
      for (std::size_t j = i + 1; j < cs.size(); ++j) {
        if (cs[i].body == cs[j].body) continue;
        if (convex_overlap(cs[i], cs[j])) ++violations;
      }
    // Arena containment.
    for (const auto& o : w.objects)
      CHECK(o.pose.position().norm() + o.shape.footprint_radius() <=
            task.arena_radius + 1e-9);
    CHECK(w.robot.pose.position().norm() + w.robot.footprint_radius() <=
          task.arena_radius + 1e-9);
  }
  CHECK(violations == 0);
}

TEST_CASE("mixed-shape scenes sample cleanly") {
  TaskSpec task = TaskSpec::make(Formation::Cross, ObjectShape::cube());
  task.shapes[1] = ObjectShape::cylinder();
  task.shapes[2] = ObjectShape::prism();
  World w = sample_initial_scene(task, 99);
  CHECK(w.objects.size() == 5);
}

}  // TEST_SUITE
