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

#include "clot/kinematics.hpp"
#include "clot/model_io.hpp"

namespace clot {

struct PDGains {
  VecX kp;
  VecX kd;
};

/// Joint-space PD targets. Velocity targets default to zero when the policy
/// emits positions only.
struct PDCommand {
  VecX q_target;
  VecX qd_target;

  static PDCommand position_only(const VecX& q_target) {
    return {q_target, VecX::Zero(q_target.size())};
  }
};

/// tau = Kp (q* - q) + Kd (qd* - qd), unclamped.
inline VecX pd_torque(const PDCommand& cmd, const JointState& state, const PDGains& gains) {
  const auto n = state.q.size();
  require(cmd.q_target.size() == n && cmd.qd_target.size() == n && state.qd.size() == n &&
              gains.kp.size() == n && gains.kd.size() == n,
          "pd_torque: dimension mismatch");
  require(cmd.q_target.allFinite() && cmd.qd_target.allFinite(), "pd_torque: non-finite command");
  return gains.kp.cwiseProduct(cmd.q_target - state.q) + gains.kd.cwiseProduct(cmd.qd_target - state.qd);
}

struct ClampedTorque {
  VecX torque;
  VecX violation;  // per-joint overshoot magnitude beyond the limit, >= 0
};

/// Elementwise clamp to +-torque_limit; the overshoot magnitudes feed the
/// torque-limit reward penalty.
inline ClampedTorque clamp_torque(const VecX& tau, const RobotModel& model) {
  require(tau.size() == model.joint_count(), "clamp_torque: dimension mismatch");
  ClampedTorque out;
  out.torque.resize(tau.size());
  out.violation.resize(tau.size());
  for (int j = 0; j < model.joint_count(); ++j) {
    const double limit = model.joints()[j].torque_limit;
    out.torque[j] = std::clamp(tau[j], -limit, limit);
    out.violation[j] = std::max(0.0, std::abs(tau[j]) - limit);
  }
  return out;
}

/// Gain profile JSON: an object keyed by joint name, each entry {"kp", "kd"}.
/// Every model joint must be present; unknown names are load errors.
inline PDGains parse_gains_json(const std::string& text, const RobotModel& model) {
  const auto doc = detail::parse_json(text, "gains");
  if (!doc.is_object()) fail("gains: expected an object keyed by joint name");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const JointSpec& j : model.joints()) known = known || j.name == key;
    if (!known) fail("gains: joint '" + key + "' does not exist in model '" + model.name() + "'");
    (void)value;
  }
  PDGains gains{VecX(model.joint_count()), VecX(model.joint_count())};
  for (int j = 0; j < model.joint_count(); ++j) {
    const std::string& name = model.joints()[j].name;
    auto it = doc.find(name);
    if (it == doc.end()) fail("gains: missing entry for joint '" + name + "'");
    gains.kp[j] = detail::number(detail::member(*it, "kp", "gains." + name), "gains." + name + ".kp");
    gains.kd[j] = detail::number(detail::member(*it, "kd", "gains." + name), "gains." + name + ".kd");
    require(gains.kp[j] >= 0.0 && gains.kd[j] >= 0.0, "gains." + name + ": kp and kd must be >= 0");
  }
  return gains;
}

inline std::string gains_to_json(const PDGains& gains, const RobotModel& model) {
  nlohmann::json doc = nlohmann::json::object();
  for (int j = 0; j < model.joint_count(); ++j)
    doc[model.joints()[j].name] = {{"kp", gains.kp[j]}, {"kd", gains.kd[j]}};
  return doc.dump(2) + "\n";
}

inline PDGains load_gains(const std::string& path, const RobotModel& model) {
  return parse_gains_json(detail::read_file(path), model);
}

/// Stiffness/damping table keyed by joint function. Joint names are matched
/// by substring ("left_hip_pitch" picks the hip-pitch row); joints with no
/// matching row get the fallback gains.
inline PDGains default_gains_by_name(const RobotModel& model, double fallback_kp = 40.0,
                                     double fallback_kd = 1.0) {
  struct Row {
    const char* pattern;
    double kp, kd;
  };
  static constexpr Row rows[] = {
      {"hip_pitch", 305.0, 5.0},   {"hip_roll", 255.0, 3.5},  {"hip_yaw", 255.0, 3.5},
      {"knee_pitch", 305.0, 5.0},  {"ankle_pitch", 50.0, 0.8}, {"ankle_roll", 30.0, 0.35},
      {"waist_roll", 255.0, 3.5},  {"waist_pitch", 305.0, 5.0}, {"waist_yaw", 255.0, 3.5},
      {"shoulder_pitch", 40.0, 1.0}, {"shoulder_roll", 40.0, 1.0}, {"shoulder_yaw", 40.0, 1.0},
      {"elbow", 40.0, 1.0},
  };
  PDGains gains{VecX::Constant(model.joint_count(), fallback_kp), VecX::Constant(model.joint_count(), fallback_kd)};
  for (int j = 0; j < model.joint_count(); ++j) {
    for (const Row& row : rows) {
      if (model.joints()[j].name.find(row.pattern) != std::string::npos) {
        gains.kp[j] = row.kp;
        gains.kd[j] = row.kd;
        break;
      }
    }
  }
  return gains;
}

}  // namespace clot
