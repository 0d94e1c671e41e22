#include "egopush/egoview.hpp"

#include <algorithm>
#include <stdexcept>

namespace egopush {

Vec3 to_camera_frame(const Pose2& robot_pose, double cam_height, double pitch,
                     const Vec3& p_world) {
  double c = std::cos(robot_pose.yaw), s = std::sin(robot_pose.yaw);
  double dx = p_world.x() - robot_pose.x;
  double dy = p_world.y() - robot_pose.y;
  double xr = c * dx + s * dy;
  double yr = -s * dx + c * dy;
  double zr = p_world.z() - cam_height;
  if (pitch == 0.0) return {xr, yr, zr};
  double cp = std::cos(pitch), sp = std::sin(pitch);
  // Forward axis tilted down by pitch; y (left) unchanged.
  return {cp * xr - sp * zr, yr, sp * xr + cp * zr};
}

bool visible(const Vec3& p, const CameraModel& cam) {
  double x = p.x();
  if (x <= 0.0) return false;
  if (std::abs(p.y()) > x * cam.tan_h()) return false;
  if (std::abs(p.z()) > x * cam.tan_v()) return false;
  return x >= cam.d_min && x <= cam.d_max;
}

Vec2 project_uv(const Vec3& p, const CameraModel& cam) {
  if (p.x() <= 0.0)
    throw std::runtime_error("project_uv: point is behind the camera");
  return {p.y() / (p.x() * cam.tan_h()), -p.z() / (p.x() * cam.tan_v())};
}

KeypointSet mask_keypoints(const KeypointSet& world_points,
                           const Pose2& robot_pose, const CameraModel& cam) {
  KeypointSet out;
  out.reserve(world_points.size());
  for (const auto& pw : world_points) {
    Vec3 pc = to_camera_frame(robot_pose, cam, pw);
    out.push_back(visible(pc, cam) ? pc : cam.mask_value);
  }
  return out;
}

bool cgv_gate(const Vec3& anchor_centroid_world, const Pose2& robot_pose,
              const CameraModel& cam) {
  Vec3 pc = to_camera_frame(robot_pose, cam, anchor_centroid_world);
  if (!visible(pc, cam)) return false;
  Vec2 uv = project_uv(pc, cam);
  return std::abs(uv.x()) <= cam.u_gate && std::abs(uv.y()) <= cam.v_gate;
}

Eigen::VectorXd GroupedObservation::flatten() const {
  Eigen::VectorXd v(dim());
  int idx = 0;
  auto put = [&](const KeypointSet& pts) {
    for (const auto& p : pts) {
      v[idx++] = p.x();
      v[idx++] = p.y();
      v[idx++] = p.z();
    }
  };
  put(act);
  put(anc);
  put(obs);
  put(ref);
  v[idx++] = prev_action.x();
  v[idx++] = prev_action.y();
  return v;
}

namespace {

KeypointSet object_world_keypoints(const SceneObject& obj, int k) {
  return transform_keypoints(canonical_keypoints(obj.shape, k), obj.pose);
}

KeypointSet camera_frame_unmasked(const KeypointSet& world_points,
                                  const Pose2& robot_pose,
                                  const CameraModel& cam) {
  KeypointSet out;
  out.reserve(world_points.size());
  for (const auto& pw : world_points)
    out.push_back(to_camera_frame(robot_pose, cam, pw));
  return out;
}

}  // namespace

GroupedObservation assemble_observation(const World& world,
                                        const Pose2& robot_pose,
                                        const CameraModel& cam,
                                        const Vec2& prev_action,
                                        const StageRef& stage, int k,
                                        int n_obs_max) {
  GroupedObservation g;
  g.k = k;
  g.n_obs_max = n_obs_max;
  g.prev_action = prev_action;

  auto group = [&](const KeypointSet& world_pts) {
    return cam.fov_masking ? mask_keypoints(world_pts, robot_pose, cam)
                           : camera_frame_unmasked(world_pts, robot_pose, cam);
  };

  const SceneObject& active = world.object_by_id(stage.active_id);
  const SceneObject& anchor = world.object_by_id(world.anchor_id());
  g.act = group(object_world_keypoints(active, k));
  g.anc = group(object_world_keypoints(anchor, k));

  // Obstacle slots: nearest-first, ties by ascending id, truncated at
  // n_obs_max, missing slots padded with the mask value.
  struct Entry {
    double dist;
    int id;
  };
  std::vector<Entry> entries;
  for (int id : world.obstacle_ids()) {
    const SceneObject& o = world.object_by_id(id);
    entries.push_back({(o.pose.position() - robot_pose.position()).norm(), id});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
  });
  g.obs.clear();
  g.obs.reserve(static_cast<std::size_t>(n_obs_max) * k);
  for (int slot = 0; slot < n_obs_max; ++slot) {
    if (slot < static_cast<int>(entries.size())) {
      KeypointSet pts =
          group(object_world_keypoints(world.object_by_id(entries[slot].id), k));
      g.obs.insert(g.obs.end(), pts.begin(), pts.end());
    } else {
      for (int i = 0; i < k; ++i) g.obs.push_back(cam.mask_value);
    }
  }

  // Reference keypoints, gated on the anchor being centrally in view.
  KeypointSet ref_world = instantiate_reference(anchor.pose, stage.rel_target,
                                                active.shape, k);
  if (!cam.fov_masking) {
    g.ref = camera_frame_unmasked(ref_world, robot_pose, cam);
  } else {
    Vec3 anchor_centroid(anchor.pose.x, anchor.pose.y,
                         anchor.shape.height / 2.0);
    bool revealed = !cam.cgv || cgv_gate(anchor_centroid, robot_pose, cam);
    if (revealed) {
      g.ref = mask_keypoints(ref_world, robot_pose, cam);
    } else {
      g.ref.assign(k, cam.mask_value);
    }
  }
  return g;
}

}  // namespace egopush
