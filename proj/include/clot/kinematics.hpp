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

#include <Eigen/Cholesky>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "clot/core.hpp"
#include "clot/geometry.hpp"

namespace clot {

enum class JointType { kRevolute, kPrismatic };

/// One degree of freedom in the chain. `parent` indexes the parent joint
/// (-1 attaches the joint to the floating base) and must be strictly smaller
/// than the joint's own index, so the list is always in topological order.
struct JointSpec {
  std::string name;
  int parent = -1;
  JointType type = JointType::kRevolute;
  Vec3 axis = Vec3::UnitZ();            // unit, in the joint's local frame
  RigidTransform origin;                // joint frame in the parent frame
  double pos_lo = -1.0, pos_hi = 1.0;   // rad or m
  double vel_limit = 10.0;              // rad/s or m/s
  double torque_limit = 100.0;          // N*m or N
};

/// Named point of interest rigidly attached to a joint's child link
/// (`parent_joint` == -1 attaches it to the base). Exactly one frame, the
/// root, is attached to the base with an identity offset; the remaining
/// frames are the tracked bodies.
struct FrameSpec {
  std::string name;
  int parent_joint = -1;
  RigidTransform offset;
};

struct JointState {
  VecX q;
  VecX qd;
};

/// IK task: pull `frame`'s position toward `target_pos` with weight `weight`.
struct IkTask {
  int frame = 0;
  Vec3 target_pos = Vec3::Zero();
  double weight = 1.0;
};

class RobotModel {
 public:
  RobotModel(std::string name, std::vector<JointSpec> joints, std::vector<FrameSpec> frames)
      : name_(std::move(name)), joints_(std::move(joints)), frames_(std::move(frames)) {
    validate();
  }

  const std::string& name() const { return name_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const std::vector<FrameSpec>& frames() const { return frames_; }

  int joint_count() const { return static_cast<int>(joints_.size()); }
  int frame_count() const { return static_cast<int>(frames_.size()); }
  /// Tracked bodies: every frame except the root.
  int body_count() const { return frame_count() - 1; }
  int root_frame() const { return root_frame_; }

  /// Frame indices in declaration order with the root skipped; this is the
  /// body ordering used by observations, rewards and metrics.
  std::vector<int> body_frames() const {
    std::vector<int> out;
    out.reserve(body_count());
    for (int f = 0; f < frame_count(); ++f)
      if (f != root_frame_) out.push_back(f);
    return out;
  }

  int frame_index(const std::string& frame_name) const {
    for (int f = 0; f < frame_count(); ++f)
      if (frames_[f].name == frame_name) return f;
    fail("unknown frame name: " + frame_name);
  }

  int joint_index(const std::string& joint_name) const {
    for (int j = 0; j < joint_count(); ++j)
      if (joints_[j].name == joint_name) return j;
    fail("unknown joint name: " + joint_name);
  }

  VecX position_lower() const {
    VecX lo(joint_count());
    for (int j = 0; j < joint_count(); ++j) lo[j] = joints_[j].pos_lo;
    return lo;
  }

  VecX position_upper() const {
    VecX hi(joint_count());
    for (int j = 0; j < joint_count(); ++j) hi[j] = joints_[j].pos_hi;
    return hi;
  }

  VecX velocity_limit() const {
    VecX v(joint_count());
    for (int j = 0; j < joint_count(); ++j) v[j] = joints_[j].vel_limit;
    return v;
  }

  VecX torque_limit() const {
    VecX t(joint_count());
    for (int j = 0; j < joint_count(); ++j) t[j] = joints_[j].torque_limit;
    return t;
  }

  VecX clamp_to_position_limits(const VecX& q) const {
    VecX out(q.size());
    for (int j = 0; j < joint_count(); ++j) out[j] = std::clamp(q[j], joints_[j].pos_lo, joints_[j].pos_hi);
    return out;
  }

 private:
  void validate() {
    require(!joints_.empty(), "model '" + name_ + "': needs at least one joint");
    for (int j = 0; j < joint_count(); ++j) {
      const JointSpec& js = joints_[j];
      const std::string at = "joints[" + std::to_string(j) + "] ('" + js.name + "')";
      require(js.parent >= -1 && js.parent < j, at + ".parent: must be -1 or a smaller joint index");
      require(std::abs(js.axis.norm() - 1.0) <= 1e-9, at + ".axis: must have unit norm within 1e-9");
      check_unit_quaternion(js.origin.rotation, at + ".origin");
      require(js.pos_lo <= js.pos_hi, at + ".limits.pos: lo must not exceed hi");
      require(js.vel_limit > 0.0 && std::isfinite(js.vel_limit), at + ".limits.vel: must be positive");
      require(js.torque_limit > 0.0 && std::isfinite(js.torque_limit), at + ".limits.torque: must be positive");
    }
    require(!frames_.empty(), "model '" + name_ + "': needs at least the root frame");
    int roots = 0;
    for (int f = 0; f < frame_count(); ++f) {
      const FrameSpec& fs = frames_[f];
      const std::string at = "frames[" + std::to_string(f) + "] ('" + fs.name + "')";
      require(fs.parent_joint >= -1 && fs.parent_joint < joint_count(), at + ".parent: invalid joint index");
      check_unit_quaternion(fs.offset.rotation, at + ".offset");
      if (fs.parent_joint == -1) {
        require(fs.offset.translation.norm() <= 1e-12 && quat_angle(fs.offset.rotation, Quat::Identity()) <= 1e-12,
                at + ": base-attached frame must have identity offset (it is the root)");
        root_frame_ = f;
        ++roots;
      }
    }
    require(roots == 1, "model '" + name_ + "': exactly one root frame required, found " + std::to_string(roots));
  }

  std::string name_;
  std::vector<JointSpec> joints_;
  std::vector<FrameSpec> frames_;
  int root_frame_ = 0;
};

inline void check_q_size(const RobotModel& model, const VecX& q, const std::string& context) {
  require(q.size() == model.joint_count(),
          context + ": q has length " + std::to_string(q.size()) + ", model has " +
              std::to_string(model.joint_count()) + " joints");
  require(q.allFinite(), context + ": q contains non-finite entries");
}

/// World pose of every joint frame before and after its own motion. The
/// pre-motion pose carries the joint anchor and world axis direction that the
/// Jacobian needs.
struct JointPoses {
  std::vector<RigidTransform> pre;   // parent_pose * origin
  std::vector<RigidTransform> post;  // pre * motion(q_j)
};

inline JointPoses compute_joint_poses(const RobotModel& model, const RigidTransform& root, const VecX& q) {
  check_q_size(model, q, "compute_joint_poses");
  const int n = model.joint_count();
  JointPoses poses;
  poses.pre.resize(n);
  poses.post.resize(n);
  for (int j = 0; j < n; ++j) {
    const JointSpec& js = model.joints()[j];
    const RigidTransform& parent = js.parent < 0 ? root : poses.post[js.parent];
    poses.pre[j] = parent * js.origin;
    if (js.type == JointType::kRevolute) {
      poses.post[j] = poses.pre[j] * RigidTransform{quat_from_axis_angle(js.axis, q[j]), Vec3::Zero()};
    } else {
      poses.post[j] = poses.pre[j] * RigidTransform{Quat::Identity(), js.axis * q[j]};
    }
  }
  return poses;
}

inline std::vector<RigidTransform> frame_poses_from_joints(const RobotModel& model, const RigidTransform& root,
                                                           const JointPoses& poses) {
  std::vector<RigidTransform> out(model.frame_count());
  for (int f = 0; f < model.frame_count(); ++f) {
    const FrameSpec& fs = model.frames()[f];
    const RigidTransform& parent = fs.parent_joint < 0 ? root : poses.post[fs.parent_joint];
    out[f] = parent * fs.offset;
  }
  return out;
}

/// Pose of every frame, composed parent-first in topological order. The root
/// frame's pose is exactly `root`.
inline std::vector<RigidTransform> forward_kinematics(const RobotModel& model, const RigidTransform& root,
                                                      const VecX& q) {
  return frame_poses_from_joints(model, root, compute_joint_poses(model, root, q));
}

/// 3 x n positional Jacobian of `frame`'s world position with respect to q.
/// Columns of joints off the frame's ancestor path are zero.
inline Eigen::Matrix3Xd frame_jacobian(const RobotModel& model, const RigidTransform& root, const VecX& q,
                                       int frame) {
  require(frame >= 0 && frame < model.frame_count(), "frame_jacobian: invalid frame index " + std::to_string(frame));
  const JointPoses poses = compute_joint_poses(model, root, q);
  const int n = model.joint_count();
  Eigen::Matrix3Xd jac = Eigen::Matrix3Xd::Zero(3, n);

  const FrameSpec& fs = model.frames()[frame];
  const RigidTransform& parent = fs.parent_joint < 0 ? root : poses.post[fs.parent_joint];
  const Vec3 point = (parent * fs.offset).translation;

  for (int j = fs.parent_joint; j >= 0; j = model.joints()[j].parent) {
    const JointSpec& js = model.joints()[j];
    const Vec3 axis_world = poses.pre[j].rotation * js.axis;
    if (js.type == JointType::kRevolute) {
      jac.col(j) = axis_world.cross(point - poses.pre[j].translation);
    } else {
      jac.col(j) = axis_world;
    }
  }
  return jac;
}

/// Weighted damped-least-squares differential IK: the v that minimizes
///   sum_i w_i ||J_i v - e_i||^2 + lambda ||v||^2,
/// e_i being target minus current frame position, solved by Cholesky on the
/// normal equations. With lambda == 0 the stacked system must be full column
/// rank or the solve is rejected.
inline VecX solve_dls_ik(const RobotModel& model, const RigidTransform& root, const VecX& q,
                         const std::vector<IkTask>& tasks, double lambda) {
  check_q_size(model, q, "solve_dls_ik");
  require(std::isfinite(lambda) && lambda >= 0.0, "solve_dls_ik: lambda must be finite and >= 0");
  const int n = model.joint_count();

  const std::vector<RigidTransform> frames = forward_kinematics(model, root, q);
  MatX normal = MatX::Zero(n, n);
  VecX rhs = VecX::Zero(n);
  for (const IkTask& task : tasks) {
    require(task.frame >= 0 && task.frame < model.frame_count(), "solve_dls_ik: invalid task frame index");
    require(std::isfinite(task.weight) && task.weight >= 0.0, "solve_dls_ik: task weight must be finite and >= 0");
    require(task.target_pos.allFinite(), "solve_dls_ik: task target contains NaN");
    const Eigen::Matrix3Xd jac = frame_jacobian(model, root, q, task.frame);
    const Vec3 err = task.target_pos - frames[task.frame].translation;
    normal.noalias() += task.weight * jac.transpose() * jac;
    rhs.noalias() += task.weight * jac.transpose() * err;
  }
  normal.diagonal().array() += lambda;

  Eigen::LLT<MatX> llt(normal);
  require(llt.info() == Eigen::Success,
          "solve_dls_ik: normal system is not positive definite (rank-deficient tasks with lambda == 0?)");
  VecX v = llt.solve(rhs);
  require(v.allFinite(), "solve_dls_ik: solution is not finite");
  return v;
}

/// Euler step with the safety clamps applied in fixed order: velocity first
/// (elementwise to +-vel_limit), then the integrated position to its limits.
inline VecX integrate_and_clamp(const VecX& q, const VecX& v, double dt, const RobotModel& model) {
  check_q_size(model, q, "integrate_and_clamp");
  require(v.size() == q.size(), "integrate_and_clamp: v length mismatch");
  require(dt > 0.0, "integrate_and_clamp: dt must be positive");
  VecX out(q.size());
  for (int j = 0; j < model.joint_count(); ++j) {
    const JointSpec& js = model.joints()[j];
    const double vj = std::clamp(v[j], -js.vel_limit, js.vel_limit);
    out[j] = std::clamp(q[j] + vj * dt, js.pos_lo, js.pos_hi);
  }
  return out;
}

}  // namespace clot
