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
#include <string>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/geometry.hpp"

namespace clot {

/// One side of an evaluation pair at a single timestep.
struct TrajectoryStep {
  std::vector<Vec3> body_pos;  // N_b tracked bodies
  RigidTransform root;
  VecX joint_pos;              // n_a actuated joints
  VecX torque;                 // n_a, may be empty on the reference side
};

/// Aligned robot/reference trajectories. Lengths and per-step dimensions
/// must agree across the pair.
struct TrajectoryPair {
  std::vector<TrajectoryStep> robot;
  std::vector<TrajectoryStep> reference;

  size_t steps() const { return robot.size(); }
};

inline void validate_pair(const TrajectoryPair& pair) {
  require(!pair.robot.empty(), "metrics: empty trajectory pair");
  require(pair.robot.size() == pair.reference.size(), "metrics: robot/reference length mismatch");
  const size_t nb = pair.robot[0].body_pos.size();
  const auto na = pair.robot[0].joint_pos.size();
  for (size_t t = 0; t < pair.robot.size(); ++t) {
    require(pair.robot[t].body_pos.size() == nb && pair.reference[t].body_pos.size() == nb,
            "metrics: body count mismatch at step " + std::to_string(t));
    require(pair.robot[t].joint_pos.size() == na && pair.reference[t].joint_pos.size() == na,
            "metrics: joint count mismatch at step " + std::to_string(t));
  }
}

/// Global mean body-position error: mean over steps and bodies of the
/// Euclidean distance between robot and reference body positions.
inline double e_mgbp(const TrajectoryPair& pair) {
  validate_pair(pair);
  const size_t T = pair.steps();
  const size_t nb = pair.robot[0].body_pos.size();
  require(nb > 0, "e_mgbp: no tracked bodies");
  double acc = 0.0;
  for (size_t t = 0; t < T; ++t) {
    double step = 0.0;
    for (size_t i = 0; i < nb; ++i) step += (pair.robot[t].body_pos[i] - pair.reference[t].body_pos[i]).norm();
    acc += step / static_cast<double>(nb);
  }
  return acc / static_cast<double>(T);
}

/// Local variant: body positions are first expressed in each side's own root
/// frame, p_tilde = R^T (p - r), which removes any common rigid offset.
inline double e_mlbp(const TrajectoryPair& pair) {
  validate_pair(pair);
  const size_t T = pair.steps();
  const size_t nb = pair.robot[0].body_pos.size();
  require(nb > 0, "e_mlbp: no tracked bodies");
  double acc = 0.0;
  for (size_t t = 0; t < T; ++t) {
    const Mat3 rot_r = pair.robot[t].root.rotation.toRotationMatrix();
    const Mat3 rot_s = pair.reference[t].root.rotation.toRotationMatrix();
    double step = 0.0;
    for (size_t i = 0; i < nb; ++i) {
      const Vec3 local_r = rot_r.transpose() * (pair.robot[t].body_pos[i] - pair.robot[t].root.translation);
      const Vec3 local_s = rot_s.transpose() * (pair.reference[t].body_pos[i] - pair.reference[t].root.translation);
      step += (local_r - local_s).norm();
    }
    acc += step / static_cast<double>(nb);
  }
  return acc / static_cast<double>(T);
}

/// Mean root position error.
inline double e_mgrp(const TrajectoryPair& pair) {
  validate_pair(pair);
  double acc = 0.0;
  for (size_t t = 0; t < pair.steps(); ++t)
    acc += (pair.robot[t].root.translation - pair.reference[t].root.translation).norm();
  return acc / static_cast<double>(pair.steps());
}

/// Mean absolute joint position error, averaged over actuated joints.
inline double e_mdp(const TrajectoryPair& pair) {
  validate_pair(pair);
  const auto na = pair.robot[0].joint_pos.size();
  require(na > 0, "e_mdp: no actuated joints");
  double acc = 0.0;
  for (size_t t = 0; t < pair.steps(); ++t)
    acc += (pair.robot[t].joint_pos - pair.reference[t].joint_pos).cwiseAbs().sum() / static_cast<double>(na);
  return acc / static_cast<double>(pair.steps());
}

/// Mean joint-torque magnitude.
inline double m_jt(const TrajectoryPair& pair) {
  validate_pair(pair);
  const auto na = pair.robot[0].torque.size();
  require(na > 0, "m_jt: robot trajectory carries no torques");
  double acc = 0.0;
  for (size_t t = 0; t < pair.steps(); ++t)
    acc += pair.robot[t].torque.cwiseAbs().sum() / static_cast<double>(na);
  return acc / static_cast<double>(pair.steps());
}

/// Population standard deviation of the per-step mean torque magnitude about
/// m_jt; zero for a single step.
inline double sigma_mjt(const TrajectoryPair& pair) {
  validate_pair(pair);
  const auto na = pair.robot[0].torque.size();
  require(na > 0, "sigma_mjt: robot trajectory carries no torques");
  const double mean = m_jt(pair);
  double acc = 0.0;
  for (size_t t = 0; t < pair.steps(); ++t) {
    const double bar = pair.robot[t].torque.cwiseAbs().sum() / static_cast<double>(na);
    acc += (bar - mean) * (bar - mean);
  }
  return std::sqrt(acc / static_cast<double>(pair.steps()));
}

struct MetricsReport {
  double e_mgbp = 0.0;
  double e_mlbp = 0.0;
  double e_mgrp = 0.0;
  double e_mdp = 0.0;
  double m_jt = 0.0;
  double sigma_mjt = 0.0;
  bool has_torques = false;
};

inline MetricsReport compute_metrics(const TrajectoryPair& pair) {
  MetricsReport report;
  report.e_mgbp = e_mgbp(pair);
  report.e_mlbp = e_mlbp(pair);
  report.e_mgrp = e_mgrp(pair);
  report.e_mdp = e_mdp(pair);
  report.has_torques = pair.robot[0].torque.size() > 0;
  if (report.has_torques) {
    report.m_jt = m_jt(pair);
    report.sigma_mjt = sigma_mjt(pair);
  }
  return report;
}

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
  nlohmann::json doc{{"e_mgbp", r.e_mgbp}, {"e_mlbp", r.e_mlbp}, {"e_mgrp", r.e_mgrp}, {"e_mdp", r.e_mdp}};
  if (r.has_torques) {
    doc["m_jt"] = r.m_jt;
    doc["sigma_mjt"] = r.sigma_mjt;
  }
  return doc;
}

}  // namespace clot
