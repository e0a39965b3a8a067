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

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/kinematics.hpp"
#include "clot/motion_data.hpp"
#include "clot/retarget.hpp"
#include "clot/rng.hpp"

namespace clot {

/// Serial chain of `k` revolute Y-axis joints with `link` spacing along X.
/// The "tip" frame sits one link past the last joint, so planar FK has the
/// closed form x = sum(link * cos(cum)), z = -sum(link * sin(cum)).
inline RobotModel make_planar_chain(int k, double link = 0.3) {
  require(k >= 1, "make_planar_chain: need at least one joint");
  std::vector<JointSpec> joints;
  std::vector<FrameSpec> frames;
  frames.push_back({"root", -1, RigidTransform{}});
  for (int j = 0; j < k; ++j) {
    JointSpec spec;
    spec.name = "j" + std::to_string(j);
    spec.parent = j - 1;
    spec.axis = Vec3::UnitY();
    spec.origin.translation = j == 0 ? Vec3::Zero() : Vec3(link, 0.0, 0.0);
    spec.pos_lo = -std::numbers::pi;
    spec.pos_hi = std::numbers::pi;
    joints.push_back(spec);
    RigidTransform frame_offset;
    frame_offset.translation = Vec3(link, 0.0, 0.0);
    frames.push_back({j == k - 1 ? "tip" : "link" + std::to_string(j), j, frame_offset});
  }
  return RobotModel("planar_chain" + std::to_string(k), std::move(joints), std::move(frames));
}

/// Six-joint mixed-axis arm used by the retargeting demos: a yaw base, three
/// pitch joints, one roll and a final yaw, with a "tip" frame 0.1 m past the
/// last joint. The reachable sphere has radius about 0.95 m.
inline RobotModel make_test_chain6() {
  struct Row {
    const char* name;
    Vec3 axis;
    Vec3 offset;
  };
  const Row rows[] = {
      {"base_yaw", Vec3::UnitZ(), {0.0, 0.0, 0.0}},
      {"shoulder_pitch", Vec3::UnitY(), {0.0, 0.0, 0.15}},
      {"elbow_pitch", Vec3::UnitY(), {0.3, 0.0, 0.0}},
      {"forearm_roll", Vec3::UnitX(), {0.25, 0.0, 0.0}},
      {"wrist_pitch", Vec3::UnitY(), {0.15, 0.0, 0.0}},
      {"wrist_yaw", Vec3::UnitZ(), {0.1, 0.0, 0.0}},
  };
  std::vector<JointSpec> joints;
  std::vector<FrameSpec> frames;
  frames.push_back({"root", -1, RigidTransform{}});
  int j = 0;
  for (const Row& row : rows) {
    JointSpec spec;
    spec.name = row.name;
    spec.parent = j - 1;
    spec.axis = row.axis;
    spec.origin.translation = row.offset;
    spec.pos_lo = -2.8;
    spec.pos_hi = 2.8;
    joints.push_back(spec);
    RigidTransform frame_offset;
    frame_offset.translation = Vec3(0.05, 0.0, 0.0);
    frames.push_back({std::string("link_") + row.name, j, frame_offset});
    ++j;
  }
  RigidTransform tip_offset;
  tip_offset.translation = Vec3(0.1, 0.0, 0.0);
  frames.push_back({"tip", 5, tip_offset});
  return RobotModel("chain6", std::move(joints), std::move(frames));
}

/// Random serial-or-branching chain for solver cross-checks: random unit
/// axes, random link offsets, one identity-offset frame per joint plus the
/// root. Joint limits are wide so clamping stays inactive.
inline RobotModel make_random_chain(Rng& rng, int n_joints) {
  require(n_joints >= 1, "make_random_chain: need at least one joint");
  std::vector<JointSpec> joints;
  std::vector<FrameSpec> frames;
  frames.push_back({"root", -1, RigidTransform{}});
  for (int j = 0; j < n_joints; ++j) {
    JointSpec spec;
    spec.name = "j" + std::to_string(j);
    spec.parent = j == 0 ? -1 : rng.uniform_int(std::max(0, j - 3), j - 1);
    spec.type = rng.uniform01() < 0.2 ? JointType::kPrismatic : JointType::kRevolute;
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    while (axis.norm() < 1e-6) axis = Vec3(rng.normal(), rng.normal(), rng.normal());
    spec.axis = axis.normalized();
    spec.origin.translation =
        Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
    Vec3 rot_axis(rng.normal(), rng.normal(), rng.normal());
    while (rot_axis.norm() < 1e-6) rot_axis = Vec3(rng.normal(), rng.normal(), rng.normal());
    spec.origin.rotation = quat_from_axis_angle(rot_axis.normalized(), rng.uniform(-std::numbers::pi, std::numbers::pi));
    spec.pos_lo = -10.0;
    spec.pos_hi = 10.0;
    joints.push_back(spec);
    RigidTransform frame_offset;
    frame_offset.translation =
        Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    frames.push_back({"f" + std::to_string(j), j, frame_offset});
  }
  return RobotModel("random_chain", std::move(joints), std::move(frames));
}

/// 23-joint humanoid: two 6-DoF legs, a 3-DoF waist and two 4-DoF arms.
/// Thirty frames total (root, one per joint, feet, torso, head, hands), so
/// the tracked body count is 29. Standing with zero joint angles puts the
/// foot frames on the ground plane when the root sits at z = 0.85.
inline RobotModel make_humanoid23() {
  std::vector<JointSpec> joints;
  std::vector<FrameSpec> frames;
  frames.push_back({"root", -1, RigidTransform{}});

  const Vec3 kPitch = Vec3::UnitY();
  const Vec3 kRoll = Vec3::UnitX();
  const Vec3 kYaw = Vec3::UnitZ();

  auto add_joint = [&](const std::string& name, int parent, const Vec3& axis, const Vec3& offset,
                       double lo, double hi, double torque) {
    JointSpec spec;
    spec.name = name;
    spec.parent = parent;
    spec.axis = axis;
    spec.origin.translation = offset;
    spec.pos_lo = lo;
    spec.pos_hi = hi;
    spec.vel_limit = 20.0;
    spec.torque_limit = torque;
    const int index = static_cast<int>(joints.size());
    joints.push_back(spec);
    frames.push_back({name, index, RigidTransform{}});
    return index;
  };

  auto add_leg = [&](const std::string& side, double y_sign) {
    const int hip_pitch = add_joint(side + "_hip_pitch", -1, kPitch,
                                    {0.0, y_sign * 0.10, -0.08}, -2.0, 2.0, 300.0);
    const int hip_roll =
        add_joint(side + "_hip_roll", hip_pitch, kRoll, {0.0, 0.0, -0.02}, -0.8, 0.8, 300.0);
    const int hip_yaw =
        add_joint(side + "_hip_yaw", hip_roll, kYaw, {0.0, 0.0, -0.03}, -1.5, 1.5, 200.0);
    const int knee =
        add_joint(side + "_knee_pitch", hip_yaw, kPitch, {0.0, 0.0, -0.30}, -0.1, 2.3, 300.0);
    const int ankle_pitch =
        add_joint(side + "_ankle_pitch", knee, kPitch, {0.0, 0.0, -0.35}, -1.0, 1.0, 60.0);
    const int ankle_roll =
        add_joint(side + "_ankle_roll", ankle_pitch, kRoll, {0.0, 0.0, -0.02}, -0.6, 0.6, 60.0);
    RigidTransform foot_offset;
    foot_offset.translation = Vec3(0.02, 0.0, -0.05);
    frames.push_back({side + "_foot", ankle_roll, foot_offset});
  };

  add_leg("left", 1.0);
  add_leg("right", -1.0);

  const int waist_yaw = add_joint("waist_yaw", -1, kYaw, {0.0, 0.0, 0.10}, -1.5, 1.5, 200.0);
  const int waist_roll =
      add_joint("waist_roll", waist_yaw, kRoll, {0.0, 0.0, 0.05}, -0.7, 0.7, 200.0);
  const int waist_pitch =
      add_joint("waist_pitch", waist_roll, kPitch, {0.0, 0.0, 0.05}, -0.7, 0.7, 200.0);

  auto add_arm = [&](const std::string& side, double y_sign) {
    const int shoulder_pitch = add_joint(side + "_shoulder_pitch", waist_pitch, kPitch,
                                         {0.0, y_sign * 0.18, 0.25}, -2.5, 2.5, 100.0);
    const int shoulder_roll = add_joint(side + "_shoulder_roll", shoulder_pitch, kRoll,
                                        {0.0, y_sign * 0.03, 0.0}, -2.0, 2.0, 100.0);
    const int shoulder_yaw =
        add_joint(side + "_shoulder_yaw", shoulder_roll, kYaw, {0.0, 0.0, -0.08}, -2.0, 2.0, 100.0);
    const int elbow =
        add_joint(side + "_elbow_pitch", shoulder_yaw, kPitch, {0.0, 0.0, -0.22}, -0.2, 2.4, 100.0);
    RigidTransform hand_offset;
    hand_offset.translation = Vec3(0.0, 0.0, -0.20);
    frames.push_back({side + "_hand", elbow, hand_offset});
  };

  add_arm("left", 1.0);
  add_arm("right", -1.0);

  RigidTransform torso_offset;
  torso_offset.translation = Vec3(0.0, 0.0, 0.15);
  frames.push_back({"torso", waist_pitch, torso_offset});
  RigidTransform head_offset;
  head_offset.translation = Vec3(0.0, 0.0, 0.35);
  frames.push_back({"head", waist_pitch, head_offset});

  return RobotModel("humanoid23", std::move(joints), std::move(frames));
}

/// Canonical keypoint frames for the humanoid, in clip keypoint order.
inline std::vector<int> humanoid_keypoint_frames(const RobotModel& model) {
  const char* names[] = {"head",      "torso",      "left_hand",       "right_hand",
                         "left_foot", "right_foot", "left_knee_pitch", "right_knee_pitch"};
  std::vector<int> out;
  for (const char* name : names) out.push_back(model.frame_index(name));
  return out;
}

/// Keypoint->frame mapping matching humanoid_keypoint_frames, feet weighted
/// heaviest because ground contact dominates tracking quality.
inline RetargetConfig humanoid_retarget_config(const RobotModel& model) {
  RetargetConfig config;
  const std::vector<int> frames = humanoid_keypoint_frames(model);
  for (size_t k = 0; k < frames.size(); ++k) {
    KeypointMapping m;
    m.keypoint = static_cast<int>(k);
    m.frame = frames[k];
    m.weight = (model.frames()[static_cast<size_t>(frames[k])].name.find("foot") != std::string::npos) ? 2.0 : 1.0;
    config.mappings.push_back(m);
  }
  return config;
}

inline std::vector<int> humanoid_foot_frames(const RobotModel& model) {
  return {model.frame_index("left_foot"), model.frame_index("right_foot")};
}

inline std::vector<int> humanoid_vr_frames(const RobotModel& model) {
  return {model.frame_index("head"), model.frame_index("left_hand"),
          model.frame_index("right_hand")};
}

enum class SyntheticMotion { kWalk, kSquat, kTurn };

struct SyntheticClipSpec {
  SyntheticMotion motion = SyntheticMotion::kWalk;
  double duration = 10.0;   // s
  double fps = 120.0;
  double speed = 0.3;       // m/s forward (walk) or rad/s yaw (turn)
  double gait_hz = 0.5;     // stride or squat cycle frequency
  double root_height = 0.85;
};

namespace detail {

/// Joint angles for one phase sample of the requested motion. Amplitudes sit
/// comfortably inside the humanoid23 limits.
inline VecX humanoid_pose(const RobotModel& model, const SyntheticClipSpec& spec, double phase) {
  VecX q = VecX::Zero(model.joint_count());
  auto set = [&](const std::string& name, double value) { q[model.joint_index(name)] = value; };
  const double s = std::sin(phase);
  switch (spec.motion) {
    case SyntheticMotion::kWalk: {
      const double left_knee = 0.2 * (1.0 - std::cos(phase));
      const double right_knee = 0.2 * (1.0 + std::cos(phase));
      set("left_hip_pitch", 0.25 * s);
      set("right_hip_pitch", -0.25 * s);
      set("left_knee_pitch", left_knee);
      set("right_knee_pitch", right_knee);
      set("left_ankle_pitch", -0.5 * (0.25 * s + left_knee));
      set("right_ankle_pitch", -0.5 * (-0.25 * s + right_knee));
      set("waist_yaw", 0.05 * s);
      set("left_shoulder_pitch", -0.2 * s);
      set("right_shoulder_pitch", 0.2 * s);
      set("left_elbow_pitch", 0.3);
      set("right_elbow_pitch", 0.3);
      break;
    }
    case SyntheticMotion::kSquat: {
      const double depth = 0.5 * (1.0 - std::cos(phase));  // 0..1
      set("left_hip_pitch", 0.5 * depth);
      set("right_hip_pitch", 0.5 * depth);
      set("left_knee_pitch", 1.0 * depth);
      set("right_knee_pitch", 1.0 * depth);
      set("left_ankle_pitch", -0.5 * depth);
      set("right_ankle_pitch", -0.5 * depth);
      set("left_shoulder_pitch", -0.6 * depth);
      set("right_shoulder_pitch", -0.6 * depth);
      set("left_elbow_pitch", 0.2);
      set("right_elbow_pitch", 0.2);
      break;
    }
    case SyntheticMotion::kTurn: {
      set("waist_yaw", 0.3 * s);
      set("left_shoulder_roll", 0.2 + 0.1 * s);
      set("right_shoulder_roll", -0.2 + 0.1 * s);
      set("left_elbow_pitch", 0.4);
      set("right_elbow_pitch", 0.4);
      set("left_knee_pitch", 0.1 + 0.05 * s);
      set("right_knee_pitch", 0.1 - 0.05 * s);
      set("left_ankle_pitch", -0.05 - 0.025 * s);
      set("right_ankle_pitch", -0.05 + 0.025 * s);
      break;
    }
  }
  return model.clamp_to_position_limits(q);
}

inline RigidTransform humanoid_root(const SyntheticClipSpec& spec, double t, double squat_phase) {
  RigidTransform root;
  switch (spec.motion) {
    case SyntheticMotion::kWalk:
      root.translation = Vec3(spec.speed * t, 0.0, spec.root_height);
      break;
    case SyntheticMotion::kSquat:
      root.translation =
          Vec3(0.0, 0.0, spec.root_height - 0.08 * 0.5 * (1.0 - std::cos(squat_phase)));
      break;
    case SyntheticMotion::kTurn:
      root.translation = Vec3(0.0, 0.0, spec.root_height);
      root.rotation = quat_from_axis_angle(Vec3::UnitZ(), spec.speed * t);
      break;
  }
  return root;
}

}  // namespace detail

/// Generates a kinematically consistent human clip by posing the humanoid
/// and recording its keypoint-frame positions, so retargeting the clip back
/// onto the same robot is near-exact. Contacts flag the two feet.
inline MotionClip make_humanoid_clip(const RobotModel& model, const SyntheticClipSpec& spec,
                                     const std::string& id, Category category,
                                     double contact_height = 0.02) {
  require(spec.duration > 0.0 && spec.fps > 0.0, "make_humanoid_clip: bad duration or fps");
  const std::vector<int> keypoint_frames = humanoid_keypoint_frames(model);
  const std::vector<int> feet = humanoid_foot_frames(model);
  MotionClip clip;
  clip.id = id;
  clip.category = category;
  clip.fps = spec.fps;
  const long n_frames = std::llround(spec.duration * spec.fps) + 1;
  for (long i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) / spec.fps;
    const double phase = 2.0 * std::numbers::pi * spec.gait_hz * t;
    MotionFrame frame;
    frame.t = t;
    frame.root = detail::humanoid_root(spec, t, phase);
    frame.joint_pos = detail::humanoid_pose(model, spec, phase);
    const auto poses = forward_kinematics(model, frame.root, frame.joint_pos);
    for (int f : keypoint_frames) frame.keypoints.push_back(poses[static_cast<size_t>(f)].translation);
    for (int f : feet)
      frame.contacts.push_back(poses[static_cast<size_t>(f)].translation.z() < contact_height);
    clip.frames.push_back(std::move(frame));
  }
  validate_clip(clip);
  return clip;
}

}  // namespace clot
