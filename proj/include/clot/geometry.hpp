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

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

#include "clot/core.hpp"

namespace clot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
// Hamilton convention; serialized scalar-first (w, x, y, z).
using Quat = Eigen::Quaterniond;

inline constexpr double kQuatNormTol = 1e-9;

/// Rigid transform: rotation as a unit quaternion plus a translation in
/// meters. Composition follows the usual parent-from-child convention.
struct RigidTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform Identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  RigidTransform inverse() const {
    const Quat inv = rotation.conjugate();
    return {inv, inv * (-translation)};
  }
};

inline bool is_unit_quaternion(const Quat& q, double tol = kQuatNormTol) {
  return std::abs(q.norm() - 1.0) <= tol;
}

inline void check_unit_quaternion(const Quat& q, const std::string& context) {
  require(is_unit_quaternion(q), context + ": quaternion norm deviates from 1 by more than 1e-9");
}

inline Quat quat_from_axis_angle(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis));
}

/// Geodesic angle between two rotations, in [0, pi].
inline double quat_angle(const Quat& a, const Quat& b) {
  // atan2 of the relative rotation keeps full precision near zero angle,
  // where the acos-of-dot form loses half the significand.
  const Quat r = a.conjugate() * b;
  return 2.0 * std::atan2(r.vec().norm(), std::abs(r.w()));
}

/// Slerp with the hemisphere flip applied first so interpolation always takes
/// the short way round.
inline Quat slerp_shortest(const Quat& a, const Quat& b, double alpha) {
  Quat bb = b;
  if (a.dot(b) < 0.0) bb.coeffs() = -bb.coeffs();
  return a.slerp(alpha, bb);
}

/// Heading about +z. Extracted as the yaw of the rotated x axis.
inline double yaw_of(const Quat& q) {
  const Vec3 x = q * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

inline Quat yaw_quat(double yaw) { return quat_from_axis_angle(Vec3::UnitZ(), yaw); }

/// Gravity direction expressed in the body frame (unit vector; world gravity
/// points along -z).
inline Vec3 projected_gravity(const Quat& body_rotation) {
  return body_rotation.conjugate() * Vec3(0.0, 0.0, -1.0);
}

}  // namespace clot
