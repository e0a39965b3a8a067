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

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/geometry.hpp"

namespace clot {

// Term order is fixed; the first kSigmaTermCount entries are the tracking
// terms that run through the exponential kernel and own an adaptive sigma.
enum class RewardTerm : int {
  kContactConsistency = 0,
  kJointLimitSatisfaction,
  kExtBodyPosition,
  kVrKeypoint,
  kFeetPosition,
  kExtBodyOrientation,
  kExtBodyAngVel,
  kExtBodyLinVel,
  kJointPosition,
  kJointVelocity,
  kFeetAirTime,
  kAlive,
  kFeetHeightDeviation,
  kTorqueLimitViolation,
  kActionRate,
  kActionSmoothness,
  kFeetContactForce,
  kStumbling,
  kFeetSlippage,
  kJointPositionLimit,
  kJointVelocityLimit,
  kTorqueLimit,
  kCollision,
  kEarlyTermination,
};

inline constexpr int kRewardTermCount = 24;
inline constexpr int kSigmaTermCount = 10;
inline constexpr int kPositiveTermCount = 12;

inline constexpr std::array<const char*, kRewardTermCount> kRewardTermNames = {
    "contact_consistency_tracking",
    "joint_limit_satisfaction",
    "extended_body_position_tracking",
    "vr_keypoint_tracking",
    "feet_position_tracking",
    "extended_body_orientation_tracking",
    "extended_body_angular_velocity_tracking",
    "extended_body_linear_velocity_tracking",
    "joint_position_tracking",
    "joint_velocity_tracking",
    "feet_air_time",
    "alive",
    "feet_height_deviation",
    "torque_limit_violation",
    "action_rate",
    "action_smoothness",
    "feet_contact_force",
    "stumbling",
    "feet_slippage",
    "joint_position_limit",
    "joint_velocity_limit",
    "torque_limit",
    "collision",
    "early_termination",
};

inline constexpr std::array<double, kRewardTermCount> kDefaultRewardWeights = {
    0.5,     // contact consistency tracking
    1.0,     // joint limit satisfaction
    1.2,     // extended body position tracking
    1.6,     // vr keypoint tracking
    1.5,     // feet position tracking
    1.5,     // extended body orientation tracking
    0.6,     // extended body angular velocity tracking
    0.6,     // extended body linear velocity tracking
    1.0,     // joint position tracking
    1.0,     // joint velocity tracking
    160.0,   // feet air-time
    0.2,     // alive bonus
    -20.0,   // feet height deviation
    -1.0e-4, // torque limit violation (sum of squared torques)
    -0.1,    // action rate
    -0.2,    // action smoothness
    -5.0e-4, // feet contact force
    -20.0,   // stumbling
    -2.0,    // feet slippage
    -10.0,   // joint position limit
    -10.0,   // joint velocity limit
    -10.0,   // torque limit
    -30.0,   // collision
    -200.0,  // early termination
};

inline int reward_term_index(const std::string& name) {
  for (int i = 0; i < kRewardTermCount; ++i)
    if (name == kRewardTermNames[static_cast<size_t>(i)]) return i;
  fail("unknown reward term '" + name + "'");
}

/// r = exp(-err / sigma); strictly decreasing in err, equals 1 at err = 0.
inline double tracking_kernel(double err, double sigma) {
  require(err >= 0.0, "tracking_kernel: negative error");
  require(sigma > 0.0, "tracking_kernel: sigma must be positive");
  return std::exp(-err / sigma);
}

/// Adaptive tolerances, one per tracking term. Sigmas follow an EMA of the
/// observed error and stay inside [sigma_min, sigma_max].
struct SigmaState {
  std::array<double, kSigmaTermCount> sigma;
  double alpha = 1e-3;
  double sigma_min = 0.01;
  double sigma_max = 5.0;

  SigmaState() { sigma.fill(0.25); }

  double operator[](RewardTerm term) const {
    const int i = static_cast<int>(term);
    require(i >= 0 && i < kSigmaTermCount, "SigmaState: not a tracking term");
    return sigma[static_cast<size_t>(i)];
  }
};

inline double update_sigma(double sigma, double observed_err, double alpha, double sigma_min,
                           double sigma_max) {
  require(observed_err >= 0.0, "update_sigma: negative error");
  require(alpha >= 0.0 && alpha <= 1.0, "update_sigma: alpha outside [0,1]");
  require(sigma_min > 0.0 && sigma_min <= sigma_max, "update_sigma: bad sigma bounds");
  const double ema = (1.0 - alpha) * sigma + alpha * observed_err;
  return std::clamp(ema, sigma_min, sigma_max);
}

inline void observe_error(SigmaState& state, RewardTerm term, double observed_err) {
  const int i = static_cast<int>(term);
  require(i >= 0 && i < kSigmaTermCount, "observe_error: not a tracking term");
  state.sigma[static_cast<size_t>(i)] = update_sigma(state.sigma[static_cast<size_t>(i)],
                                                     observed_err, state.alpha, state.sigma_min,
                                                     state.sigma_max);
}

struct RewardConfig {
  std::array<double, kRewardTermCount> weights = kDefaultRewardWeights;
  double air_time_min = 0.2;           // s of flight before air-time reward accrues
  double feet_height_tolerance = 0.02; // m of dead zone before height deviation penalizes
  double contact_force_max = 400.0;    // N threshold for the contact force penalty
  double stumble_ratio = 5.0;          // lateral/vertical force ratio that counts as a stumble
  double limit_activation = 0.9;       // fraction of joint range where limit terms engage
};

inline void validate_reward_config(const RewardConfig& c) {
  for (int i = 0; i < kPositiveTermCount; ++i)
    require(c.weights[static_cast<size_t>(i)] >= 0.0,
            std::string("reward config: positive term '") + kRewardTermNames[static_cast<size_t>(i)] +
                "' must have weight >= 0");
  for (int i = kPositiveTermCount; i < kRewardTermCount; ++i)
    require(c.weights[static_cast<size_t>(i)] <= 0.0,
            std::string("reward config: penalty term '") + kRewardTermNames[static_cast<size_t>(i)] +
                "' must have weight <= 0");
  require(c.air_time_min >= 0.0, "reward config: air_time_min must be >= 0");
  require(c.feet_height_tolerance >= 0.0, "reward config: feet_height_tolerance must be >= 0");
  require(c.contact_force_max > 0.0, "reward config: contact_force_max must be > 0");
  require(c.stumble_ratio > 0.0, "reward config: stumble_ratio must be > 0");
  require(c.limit_activation > 0.0 && c.limit_activation < 1.0,
          "reward config: limit_activation must lie in (0,1)");
}

/// Per-foot snapshot used by the contact-related terms.
struct FootState {
  Vec3 position = Vec3::Zero();
  Vec3 ref_position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  bool contact = false;
  bool ref_contact = false;
  double vertical_force = 0.0;
  double lateral_force = 0.0;
  double air_time = 0.0;  // s spent airborne before the current tick
  bool touchdown = false; // first contact tick after a flight phase
};

/// Everything compute_rewards needs about one control step. Reference
/// quantities are aligned with the true timestep, not with any shifted
/// observation window.
struct RewardInput {
  std::vector<Vec3> body_pos, ref_body_pos;
  std::vector<Quat> body_quat, ref_body_quat;
  std::vector<Vec3> body_lin_vel, ref_body_lin_vel;
  std::vector<Vec3> body_ang_vel, ref_body_ang_vel;
  std::vector<Vec3> keypoint_pos, ref_keypoint_pos;
  VecX joint_pos, ref_joint_pos;
  VecX joint_vel, ref_joint_vel;
  VecX torque;
  VecX pos_lower, pos_upper, vel_limit, torque_limit;
  VecX action, prev_action, prev_prev_action;
  std::vector<FootState> feet;
  bool collision = false;
  bool terminated = false;
};

struct RewardBreakdown {
  std::array<double, kRewardTermCount> raw{};
  std::array<double, kRewardTermCount> weighted{};
  double total = 0.0;

  double raw_of(RewardTerm t) const { return raw[static_cast<size_t>(static_cast<int>(t))]; }
  double weighted_of(RewardTerm t) const {
    return weighted[static_cast<size_t>(static_cast<int>(t))];
  }
};

namespace detail {

inline void check_reward_dims(const RewardInput& in) {
  const size_t nb = in.body_pos.size();
  require(nb > 0, "reward: no tracked bodies");
  require(in.ref_body_pos.size() == nb && in.body_quat.size() == nb &&
              in.ref_body_quat.size() == nb && in.body_lin_vel.size() == nb &&
              in.ref_body_lin_vel.size() == nb && in.body_ang_vel.size() == nb &&
              in.ref_body_ang_vel.size() == nb,
          "reward: body array size mismatch");
  require(!in.keypoint_pos.empty() && in.keypoint_pos.size() == in.ref_keypoint_pos.size(),
          "reward: keypoint array size mismatch");
  const auto n = in.joint_pos.size();
  require(n > 0, "reward: no joints");
  require(in.ref_joint_pos.size() == n && in.joint_vel.size() == n &&
              in.ref_joint_vel.size() == n && in.torque.size() == n &&
              in.pos_lower.size() == n && in.pos_upper.size() == n && in.vel_limit.size() == n &&
              in.torque_limit.size() == n,
          "reward: joint array size mismatch");
  require(in.action.size() == n && in.prev_action.size() == n && in.prev_prev_action.size() == n,
          "reward: action array size mismatch");
  require(!in.feet.empty(), "reward: no feet");
}

inline double mean_sq_pos_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]).squaredNorm();
  return acc / static_cast<double>(a.size());
}

}  // namespace detail

/// Evaluates all 24 terms. Tracking terms feed their error into the kernel
/// with the current sigma; penalties report a nonnegative raw magnitude that
/// the nonpositive weight turns into a nonpositive contribution.
inline RewardBreakdown compute_rewards(const RewardInput& in, const RewardConfig& config,
                                       const SigmaState& sigmas) {
  validate_reward_config(config);
  detail::check_reward_dims(in);

  const size_t nb = in.body_pos.size();
  const auto n = in.joint_pos.size();
  const size_t nf = in.feet.size();
  RewardBreakdown out;
  auto set = [&](RewardTerm term, double raw_value) {
    const size_t i = static_cast<size_t>(static_cast<int>(term));
    out.raw[i] = raw_value;
    out.weighted[i] = config.weights[i] * raw_value;
  };
  auto kernel_term = [&](RewardTerm term, double err) { set(term, tracking_kernel(err, sigmas[term])); };

  // Contact consistency: mismatch rate between sim and reference flags.
  int mismatches = 0;
  for (const auto& foot : in.feet) mismatches += foot.contact != foot.ref_contact ? 1 : 0;
  kernel_term(RewardTerm::kContactConsistency, static_cast<double>(mismatches) / static_cast<double>(nf));

  // Joint limit satisfaction: mean normalized overshoot beyond the activation
  // band, 0 at mid-range and 1 at a hard limit.
  double limit_err = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double range = in.pos_upper[j] - in.pos_lower[j];
    require(range > 0.0, "reward: joint " + std::to_string(j) + " has empty position range");
    const double centered = std::abs(2.0 * (in.joint_pos[j] - in.pos_lower[j]) / range - 1.0);
    limit_err += std::max(0.0, centered - config.limit_activation) / (1.0 - config.limit_activation);
  }
  kernel_term(RewardTerm::kJointLimitSatisfaction, limit_err / static_cast<double>(n));

  kernel_term(RewardTerm::kExtBodyPosition, detail::mean_sq_pos_error(in.body_pos, in.ref_body_pos));
  kernel_term(RewardTerm::kVrKeypoint, detail::mean_sq_pos_error(in.keypoint_pos, in.ref_keypoint_pos));

  double feet_pos_err = 0.0;
  for (const auto& foot : in.feet) feet_pos_err += (foot.position - foot.ref_position).squaredNorm();
  kernel_term(RewardTerm::kFeetPosition, feet_pos_err / static_cast<double>(nf));

  double rot_err = 0.0;
  for (size_t i = 0; i < nb; ++i) {
    const double angle = quat_angle(in.body_quat[i], in.ref_body_quat[i]);
    rot_err += angle * angle;
  }
  kernel_term(RewardTerm::kExtBodyOrientation, rot_err / static_cast<double>(nb));

  kernel_term(RewardTerm::kExtBodyAngVel, detail::mean_sq_pos_error(in.body_ang_vel, in.ref_body_ang_vel));
  kernel_term(RewardTerm::kExtBodyLinVel, detail::mean_sq_pos_error(in.body_lin_vel, in.ref_body_lin_vel));

  kernel_term(RewardTerm::kJointPosition,
              (in.joint_pos - in.ref_joint_pos).squaredNorm() / static_cast<double>(n));
  kernel_term(RewardTerm::kJointVelocity,
              (in.joint_vel - in.ref_joint_vel).squaredNorm() / static_cast<double>(n));

  // Air-time reward pays out once, at touchdown, for flight beyond the
  // minimum duration.
  double air_time = 0.0;
  for (const auto& foot : in.feet)
    if (foot.touchdown) air_time += std::max(0.0, foot.air_time - config.air_time_min);
  set(RewardTerm::kFeetAirTime, air_time);

  set(RewardTerm::kAlive, in.terminated ? 0.0 : 1.0);

  double height_dev = 0.0;
  for (const auto& foot : in.feet)
    height_dev += std::max(0.0, std::abs(foot.position.z() - foot.ref_position.z()) -
                                    config.feet_height_tolerance);
  set(RewardTerm::kFeetHeightDeviation, height_dev);

  set(RewardTerm::kTorqueLimitViolation, in.torque.squaredNorm());
  set(RewardTerm::kActionRate, (in.action - in.prev_action).squaredNorm());
  set(RewardTerm::kActionSmoothness,
      (in.action - 2.0 * in.prev_action + in.prev_prev_action).squaredNorm());

  double force_excess = 0.0;
  double stumbles = 0.0;
  double slip = 0.0;
  for (const auto& foot : in.feet) {
    const double over = std::max(0.0, foot.vertical_force - config.contact_force_max);
    force_excess += over * over;
    if (foot.contact && foot.lateral_force > config.stumble_ratio * foot.vertical_force)
      stumbles += 1.0;
    if (foot.contact) slip += foot.velocity.head<2>().squaredNorm();
  }
  set(RewardTerm::kFeetContactForce, force_excess);
  set(RewardTerm::kStumbling, stumbles);
  set(RewardTerm::kFeetSlippage, slip);

  double pos_violation = 0.0;
  double vel_violation = 0.0;
  double torque_violation = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    pos_violation += std::max(0.0, in.joint_pos[j] - in.pos_upper[j]) +
                     std::max(0.0, in.pos_lower[j] - in.joint_pos[j]);
    vel_violation += std::max(0.0, std::abs(in.joint_vel[j]) - in.vel_limit[j]);
    torque_violation += std::max(0.0, std::abs(in.torque[j]) - in.torque_limit[j]);
  }
  set(RewardTerm::kJointPositionLimit, pos_violation);
  set(RewardTerm::kJointVelocityLimit, vel_violation);
  set(RewardTerm::kTorqueLimit, torque_violation);

  set(RewardTerm::kCollision, in.collision ? 1.0 : 0.0);
  set(RewardTerm::kEarlyTermination, in.terminated ? 1.0 : 0.0);

  out.total = 0.0;
  for (double w : out.weighted) out.total += w;
  return out;
}

inline nlohmann::json reward_config_to_json(const RewardConfig& c) {
  nlohmann::json weights;
  for (int i = 0; i < kRewardTermCount; ++i)
    weights[kRewardTermNames[static_cast<size_t>(i)]] = c.weights[static_cast<size_t>(i)];
  return nlohmann::json{{"weights", weights},
                        {"air_time_min", c.air_time_min},
                        {"feet_height_tolerance", c.feet_height_tolerance},
                        {"contact_force_max", c.contact_force_max},
                        {"stumble_ratio", c.stumble_ratio},
                        {"limit_activation", c.limit_activation}};
}

inline RewardConfig parse_reward_json(const nlohmann::json& doc) {
  RewardConfig c;
  if (doc.contains("weights")) {
    require(doc.at("weights").is_object(), "reward config: 'weights' must be an object");
    for (const auto& [key, value] : doc.at("weights").items()) {
      require(value.is_number(), "reward config: weight '" + key + "' must be a number");
      c.weights[static_cast<size_t>(reward_term_index(key))] = value.get<double>();
    }
  }
  if (doc.contains("air_time_min")) c.air_time_min = doc.at("air_time_min").get<double>();
  if (doc.contains("feet_height_tolerance"))
    c.feet_height_tolerance = doc.at("feet_height_tolerance").get<double>();
  if (doc.contains("contact_force_max")) c.contact_force_max = doc.at("contact_force_max").get<double>();
  if (doc.contains("stumble_ratio")) c.stumble_ratio = doc.at("stumble_ratio").get<double>();
  if (doc.contains("limit_activation")) c.limit_activation = doc.at("limit_activation").get<double>();
  validate_reward_config(c);
  return c;
}

inline std::string breakdown_csv_header() {
  std::string line = "total";
  for (const char* name : kRewardTermNames) {
    line += ',';
    line += name;
  }
  return line;
}

inline std::string breakdown_csv_row(const RewardBreakdown& b) {
  std::string line = format_double(b.total);
  for (double w : b.weighted) {
    line += ',';
    line += format_double(w);
  }
  return line;
}

}  // namespace clot
