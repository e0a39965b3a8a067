// Copyright 2026 The CLOT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/kinematics.hpp"
#include "clot/motion_data.hpp"

namespace clot {

/// One IK task source: a human keypoint driving a robot frame. The scale
/// stretches the keypoint's offset from the root to bridge limb-length
/// differences.
struct KeypointMapping {
  int keypoint = -1;
  int frame = -1;
  double weight = 1.0;
  double scale = 1.0;
};

struct RetargetConfig {
  std::vector<KeypointMapping> mappings;
  double lambda = 1e-3;
  int iterations_per_frame = 4;
};

inline void validate_retarget_config(const RetargetConfig& config, const RobotModel& model) {
  require(!config.mappings.empty(), "retarget config: no keypoint mappings");
  require(config.lambda >= 0.0, "retarget config: lambda must be >= 0");
  require(config.iterations_per_frame >= 1, "retarget config: iterations_per_frame must be >= 1");
  for (const auto& m : config.mappings) {
    require(m.keypoint >= 0, "retarget config: negative keypoint index");
    require(m.frame >= 0 && m.frame < static_cast<int>(model.frame_count()),
            "retarget config: frame index out of range");
    require(m.weight >= 0.0, "retarget config: weight must be >= 0");
    require(std::isfinite(m.scale), "retarget config: scale must be finite");
  }
}

/// Re-anchors each mapped keypoint at the root with its offset stretched by
/// the mapping's scale. Unmapped keypoints pass through unchanged; a keypoint
/// with several mappings takes the last one.
inline std::vector<Vec3> scale_keypoints(const std::vector<Vec3>& keypoints, const Vec3& root_pos,
                                         const RetargetConfig& config) {
  std::vector<Vec3> scaled = keypoints;
  for (const auto& m : config.mappings) {
    require(m.keypoint >= 0 && m.keypoint < static_cast<int>(keypoints.size()),
            "scale_keypoints: keypoint index out of range");
    scaled[static_cast<size_t>(m.keypoint)] =
        root_pos + m.scale * (keypoints[static_cast<size_t>(m.keypoint)] - root_pos);
  }
  return scaled;
}

/// One online retargeting step: a fixed number of damped IK rounds toward
/// the scaled keypoints, each integrated with the full frame dt and clamped
/// to the joint limits.
inline VecX retarget_frame(const RobotModel& model, const VecX& q_prev, const RigidTransform& root,
                           const std::vector<Vec3>& human_keypoints, const RetargetConfig& config,
                           double dt) {
  validate_retarget_config(config, model);
  require(dt > 0.0, "retarget_frame: dt must be > 0");
  const std::vector<Vec3> targets = scale_keypoints(human_keypoints, root.translation, config);
  std::vector<IkTask> tasks;
  tasks.reserve(config.mappings.size());
  for (const auto& m : config.mappings)
    tasks.push_back(IkTask{m.frame, targets[static_cast<size_t>(m.keypoint)], m.weight});
  VecX q = q_prev;
  for (int it = 0; it < config.iterations_per_frame; ++it) {
    // The DLS solve yields a displacement; expressing it as a velocity over
    // the frame interval lets the clamp enforce joint velocity limits in
    // physical units while keeping the full Newton step when unclamped.
    const VecX v = solve_dls_ik(model, root, q, tasks, config.lambda) / dt;
    q = integrate_and_clamp(q, v, dt, model);
  }
  return q;
}

/// Reference root: human root position with only the yaw component of its
/// orientation, since roll and pitch do not transfer across morphologies.
inline RigidTransform reference_root_from_human(const RigidTransform& human_root) {
  return RigidTransform{yaw_quat(yaw_of(human_root.rotation)), human_root.translation};
}

struct ReferenceFrame {
  RigidTransform root;
  VecX q_ref;
  VecX qd_ref;                        // empty when no velocity estimate exists
  std::vector<Vec3> frame_positions;  // body frames, model order
};

struct ReferenceTrajectory {
  double fps = 0.0;
  std::vector<ReferenceFrame> frames;
};

/// Sequential per-frame retargeting with warm-started joint positions.
inline ReferenceTrajectory retarget_clip(const RobotModel& model, const MotionClip& clip,
                                         const RetargetConfig& config) {
  validate_retarget_config(config, model);
  validate_clip(clip);
  for (const auto& m : config.mappings)
    require(m.keypoint < static_cast<int>(clip.keypoint_count()),
            "retarget_clip: mapping keypoint exceeds clip keypoint count");
  const double dt = 1.0 / clip.fps;
  ReferenceTrajectory out;
  out.fps = clip.fps;
  out.frames.reserve(clip.frames.size());
  VecX q = model.clamp_to_position_limits(VecX::Zero(static_cast<Eigen::Index>(model.joint_count())));
  const auto body_frames = model.body_frames();
  for (const auto& frame : clip.frames) {
    ReferenceFrame ref;
    ref.root = reference_root_from_human(frame.root);
    const VecX q_prev = q;
    q = retarget_frame(model, q, ref.root, frame.keypoints, config, dt);
    ref.q_ref = q;
    ref.qd_ref = out.frames.empty() ? VecX(VecX::Zero(q.size())) : VecX(((q - q_prev) / dt).eval());
    const auto poses = forward_kinematics(model, ref.root, q);
    ref.frame_positions.reserve(body_frames.size());
    for (int f : body_frames) ref.frame_positions.push_back(poses[static_cast<size_t>(f)].translation);
    out.frames.push_back(std::move(ref));
  }
  return out;
}

/// Packs a reference trajectory back into the clip container: keypoints hold
/// the body-frame positions and joint_pos the retargeted configuration.
inline MotionClip reference_to_clip(const ReferenceTrajectory& trajectory, const std::string& id,
                                    Category category) {
  require(!trajectory.frames.empty(), "reference_to_clip: empty trajectory");
  MotionClip clip;
  clip.id = id;
  clip.category = category;
  clip.fps = trajectory.fps;
  double t = 0.0;
  for (const auto& ref : trajectory.frames) {
    MotionFrame frame;
    frame.t = t;
    frame.root = ref.root;
    frame.keypoints = ref.frame_positions;
    frame.joint_pos = ref.q_ref;
    clip.frames.push_back(std::move(frame));
    t += 1.0 / trajectory.fps;
  }
  validate_clip(clip);
  return clip;
}

inline RetargetConfig parse_retarget_json(const nlohmann::json& doc, const RobotModel& model) {
  RetargetConfig config;
  if (doc.contains("lambda")) config.lambda = doc.at("lambda").get<double>();
  if (doc.contains("iterations_per_frame"))
    config.iterations_per_frame = doc.at("iterations_per_frame").get<int>();
  require(doc.contains("mappings") && doc.at("mappings").is_array(),
          "retarget config: 'mappings' array required");
  for (const auto& m : doc.at("mappings")) {
    KeypointMapping mapping;
    mapping.keypoint = m.at("keypoint").get<int>();
    const auto& frame = m.at("frame");
    if (frame.is_string()) {
      mapping.frame = static_cast<int>(model.frame_index(frame.get<std::string>()));
    } else {
      mapping.frame = frame.get<int>();
    }
    if (m.contains("weight")) mapping.weight = m.at("weight").get<double>();
    if (m.contains("scale")) mapping.scale = m.at("scale").get<double>();
    config.mappings.push_back(mapping);
  }
  validate_retarget_config(config, model);
  return config;
}

inline nlohmann::json retarget_config_to_json(const RetargetConfig& config, const RobotModel& model) {
  nlohmann::json mappings = nlohmann::json::array();
  for (const auto& m : config.mappings) {
    mappings.push_back(nlohmann::json{{"keypoint", m.keypoint},
                                      {"frame", model.frames()[static_cast<size_t>(m.frame)].name},
                                      {"weight", m.weight},
                                      {"scale", m.scale}});
  }
  return nlohmann::json{
      {"lambda", config.lambda}, {"iterations_per_frame", config.iterations_per_frame}, {"mappings", mappings}};
}

}  // namespace clot
