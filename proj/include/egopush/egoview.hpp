#pragma once

#include <Eigen/Dense>
#include <vector>

#include "egopush/world.hpp"

namespace egopush {

// Virtual egocentric camera. Angles in radians. The frame used everywhere
// is camera-aligned: x forward, y left, z up, origin at the camera. pitch
// tilts the forward axis down and is applied for both masking and
// rendering; set it to 0 for a flat sensor.
struct CameraModel {
  double fov_h = 70.0 * kPi / 180.0;
  double fov_v = 60.0 * kPi / 180.0;
  double d_min = 0.15;
  double d_max = 5.0;
  Vec3 mask_value = Vec3(-10.0, -10.0, -10.0);
  double u_gate = 0.5;
  double v_gate = 0.5;
  double height = 0.20;
  double pitch = 11.5 * kPi / 180.0;

  bool fov_masking = true;  // off = "global" ablation
  bool cgv = true;          // off = "w/o C-GV" ablation

  double tan_h() const { return std::tan(fov_h / 2.0); }
  double tan_v() const { return std::tan(fov_v / 2.0); }
};

// World point into the camera-aligned robot frame.
Vec3 to_camera_frame(const Pose2& robot_pose, double cam_height, double pitch,
                     const Vec3& p_world);

inline Vec3 to_camera_frame(const Pose2& robot_pose, const CameraModel& cam,
                            const Vec3& p_world) {
  return to_camera_frame(robot_pose, cam.height, cam.pitch, p_world);
}

bool visible(const Vec3& p_cam, const CameraModel& cam);

// Normalized image-plane coordinates; only |u|,|v| are consumed downstream.
// Requires x > 0.
Vec2 project_uv(const Vec3& p_cam, const CameraModel& cam);

// Transform + frustum-mask a keypoint set. Order preserved; masked entries
// become cam.mask_value exactly.
KeypointSet mask_keypoints(const KeypointSet& world_points,
                           const Pose2& robot_pose, const CameraModel& cam);

// Center-gated visibility for the reference keypoints: the anchor centroid
// must be frustum-visible and project inside the central gate.
bool cgv_gate(const Vec3& anchor_centroid_world, const Pose2& robot_pose,
              const CameraModel& cam);

struct GroupedObservation {
  int k = 8;
  int n_obs_max = 3;
  KeypointSet act;  // k
  KeypointSet anc;  // k
  KeypointSet obs;  // n_obs_max * k, distance-sorted slots, eps-padded
  KeypointSet ref;  // k
  Vec2 prev_action = Vec2::Zero();

  static int dim(int k, int n_obs_max) { return 3 * k * (3 + n_obs_max) + 2; }
  int dim() const { return dim(k, n_obs_max); }
  Eigen::VectorXd flatten() const;
};

// Full constrained observation for the given stage. Honors the ablation
// flags: fov_masking=false exposes everything (global), cgv=false keeps the
// frustum but drops the center gate.
GroupedObservation assemble_observation(const World& world,
                                        const Pose2& robot_pose,
                                        const CameraModel& cam,
                                        const Vec2& prev_action,
                                        const StageRef& stage, int k,
                                        int n_obs_max);

}  // namespace egopush
