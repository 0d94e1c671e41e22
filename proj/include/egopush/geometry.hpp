#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace egopush {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;

// Wrap into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Planar pose, yaw kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(wrap_angle(yaw_)) {}

  Vec2 position() const { return {x, y}; }

  // Local -> parent.
  Vec2 transform(const Vec2& p) const {
    double c = std::cos(yaw), s = std::sin(yaw);
    return {x + c * p.x() - s * p.y(), y + s * p.x() + c * p.y()};
  }

  // Parent -> local.
  Vec2 inverse_transform(const Vec2& p) const {
    double c = std::cos(yaw), s = std::sin(yaw);
    double dx = p.x() - x, dy = p.y() - y;
    return {c * dx + s * dy, -s * dx + c * dy};
  }

  // Planar rigid transform of a 3-D point (z passes through).
  Vec3 transform3(const Vec3& p) const {
    Vec2 q = transform({p.x(), p.y()});
    return {q.x(), q.y(), p.z()};
  }
};

// a then b-in-a's-frame, i.e. the pose of b composed under a.
inline Pose2 compose(const Pose2& a, const Pose2& b) {
  Vec2 p = a.transform({b.x, b.y});
  return Pose2(p.x(), p.y(), a.yaw + b.yaw);
}

inline Pose2 inverse(const Pose2& a) {
  double c = std::cos(a.yaw), s = std::sin(a.yaw);
  return Pose2(-(c * a.x + s * a.y), -(-s * a.x + c * a.y), -a.yaw);
}

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

using KeypointSet = std::vector<Vec3>;

inline KeypointSet transform_keypoints(const KeypointSet& pts,
                                       const Pose2& pose) {
  KeypointSet out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(pose.transform3(p));
  return out;
}

inline Vec3 centroid(const KeypointSet& pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  if (!pts.empty()) c /= static_cast<double>(pts.size());
  return c;
}

}  // namespace egopush
