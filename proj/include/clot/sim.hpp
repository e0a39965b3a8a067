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
#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/kinematics.hpp"
#include "clot/rng.hpp"

namespace clot {

/// Per-joint second-order plant parameters.
struct JointDynamics {
  VecX inertia;       // kg m^2, > 0
  VecX damping;       // N m s / rad, >= 0
  VecX dry_friction;  // N m, >= 0
};

inline void validate_dynamics(const JointDynamics& dyn, const RobotModel& model) {
  const auto n = static_cast<Eigen::Index>(model.joint_count());
  require(dyn.inertia.size() == n && dyn.damping.size() == n && dyn.dry_friction.size() == n,
          "dynamics: array length must equal joint count");
  for (Eigen::Index j = 0; j < n; ++j) {
    require(dyn.inertia[j] > 0.0, "dynamics: inertia must be > 0 at joint " + std::to_string(j));
    require(dyn.damping[j] >= 0.0, "dynamics: damping must be >= 0 at joint " + std::to_string(j));
    require(dyn.dry_friction[j] >= 0.0,
            "dynamics: dry friction must be >= 0 at joint " + std::to_string(j));
  }
}

inline JointDynamics uniform_dynamics(int n_joints, double inertia, double damping, double dry_friction) {
  JointDynamics dyn;
  dyn.inertia = VecX::Constant(n_joints, inertia);
  dyn.damping = VecX::Constant(n_joints, damping);
  dyn.dry_friction = VecX::Constant(n_joints, dry_friction);
  return dyn;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

inline void validate_range(const Range& r, const std::string& name) {
  require(r.lo <= r.hi, "randomization range '" + name + "' has lo > hi");
  require(std::isfinite(r.lo) && std::isfinite(r.hi), "randomization range '" + name + "' is not finite");
}

inline double sample_range(const Range& r, Rng& rng) {
  return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi);
}

struct DomainRandConfig {
  Range base_com{-0.08, 0.08};         // m, per axis
  Range link_com{-0.02, 0.02};         // m, per axis
  Range link_mass_scale{0.90, 1.10};
  Range link_inertia_scale{0.85, 1.15};
  Range pd_gain_scale{0.90, 1.10};     // applied independently to Kp and Kd
  Range friction_scale{0.80, 1.50};
  Range push_velocity_xy{-0.20, 0.20}; // m/s, per axis
  Range push_interval{3.0, 6.0};       // s
  Range rfi_limit_scale{0.50, 1.50};
  Range control_delay{0.0, 2.0};       // control steps, rounded to int
};

inline void validate_dr_config(const DomainRandConfig& c) {
  validate_range(c.base_com, "base_com");
  validate_range(c.link_com, "link_com");
  validate_range(c.link_mass_scale, "link_mass_scale");
  validate_range(c.link_inertia_scale, "link_inertia_scale");
  validate_range(c.pd_gain_scale, "pd_gain_scale");
  validate_range(c.friction_scale, "friction_scale");
  validate_range(c.push_velocity_xy, "push_velocity_xy");
  validate_range(c.push_interval, "push_interval");
  validate_range(c.rfi_limit_scale, "rfi_limit_scale");
  validate_range(c.control_delay, "control_delay");
  require(c.push_interval.lo > 0.0, "push_interval must be positive");
}

/// One episode's sampled physical parameters. Flattens to 13 entries for the
/// critic's privileged observation; the push interval is excluded because it
/// is re-drawn at every push event.
struct RandomizedParams {
  Vec3 base_com_offset = Vec3::Zero();
  Vec3 link_com_offset = Vec3::Zero();
  double link_mass_scale = 1.0;
  double link_inertia_scale = 1.0;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  double friction_scale = 1.0;
  double rfi_limit_scale = 0.0;
  int control_delay = 0;

  VecX flatten() const {
    VecX out(13);
    out.segment<3>(0) = base_com_offset;
    out.segment<3>(3) = link_com_offset;
    out[6] = link_mass_scale;
    out[7] = link_inertia_scale;
    out[8] = kp_scale;
    out[9] = kd_scale;
    out[10] = friction_scale;
    out[11] = rfi_limit_scale;
    out[12] = static_cast<double>(control_delay);
    return out;
  }
};

inline constexpr long kDrParamCount = 13;

/// No randomization: unit scales, zero offsets, zero delay and noise.
inline RandomizedParams identity_params() { return RandomizedParams{}; }

inline RandomizedParams sample_randomization(const DomainRandConfig& config, Rng& rng) {
  validate_dr_config(config);
  RandomizedParams p;
  for (int i = 0; i < 3; ++i) p.base_com_offset[i] = sample_range(config.base_com, rng);
  for (int i = 0; i < 3; ++i) p.link_com_offset[i] = sample_range(config.link_com, rng);
  p.link_mass_scale = sample_range(config.link_mass_scale, rng);
  p.link_inertia_scale = sample_range(config.link_inertia_scale, rng);
  p.kp_scale = sample_range(config.pd_gain_scale, rng);
  p.kd_scale = sample_range(config.pd_gain_scale, rng);
  p.friction_scale = sample_range(config.friction_scale, rng);
  p.rfi_limit_scale = sample_range(config.rfi_limit_scale, rng);
  p.control_delay = static_cast<int>(std::llround(sample_range(config.control_delay, rng)));
  return p;
}

struct SimConfig {
  double dt = 1.0 / 400.0;
  double rfi_fraction = 0.01;          // RFI amplitude = scale * fraction * torque limit
  double contact_height = 0.02;        // m, foot below this height is in contact
  double contact_stiffness = 2.0e4;    // N/m, penetration to normal-force proxy
  double lateral_force_per_speed = 50; // N s/m, slip speed to lateral-force proxy
  double push_decay_tau = 0.5;         // s, exponential decay of the push offset
};

inline void validate_sim_config(const SimConfig& c) {
  require(c.dt > 0.0, "sim config: dt must be > 0");
  require(c.rfi_fraction >= 0.0, "sim config: rfi_fraction must be >= 0");
  require(c.contact_height >= 0.0, "sim config: contact_height must be >= 0");
  require(c.contact_stiffness >= 0.0, "sim config: contact_stiffness must be >= 0");
  require(c.lateral_force_per_speed >= 0.0, "sim config: lateral_force_per_speed must be >= 0");
  require(c.push_decay_tau > 0.0, "sim config: push_decay_tau must be > 0");
}

/// Contact proxy for one foot derived from its FK height and slip speed.
struct ContactInfo {
  bool contact = false;
  double normal_force = 0.0;
  double lateral_force = 0.0;
};

inline ContactInfo foot_contact(double foot_height, double slip_speed, const SimConfig& config) {
  ContactInfo info;
  info.contact = foot_height < config.contact_height;
  if (info.contact) {
    info.normal_force = config.contact_stiffness * (config.contact_height - foot_height);
    info.lateral_force = config.lateral_force_per_speed * slip_speed;
  }
  return info;
}

/// Semi-implicit Euler step of one joint. Damping is handled implicitly and
/// dry friction as an impulse clamp, so with zero input the speed magnitude
/// never grows and never crosses zero.
inline void integrate_joint(double& q, double& qd, double tau, double inertia, double damping,
                            double dry_friction, double dt) {
  const double qd_drive = (qd + dt * tau / inertia) / (1.0 + dt * damping / inertia);
  const double friction_dv = dt * dry_friction / inertia;
  const double magnitude = std::max(0.0, std::abs(qd_drive) - friction_dv);
  qd = qd_drive >= 0.0 ? magnitude : -magnitude;
  q += dt * qd;
}

struct SimState {
  VecX q;
  VecX qd;
  VecX tau_applied;
  RigidTransform root;
  Vec3 root_lin_vel = Vec3::Zero();
  Vec3 root_ang_vel = Vec3::Zero();
  Vec3 push_velocity = Vec3::Zero();
  double time = 0.0;
  long steps = 0;
  std::vector<ContactInfo> feet;
  std::deque<VecX> delay_fifo;
};

/// Schedules root pushes: at each firing the xy push velocity jumps by a
/// fresh sample and the next firing time moves ahead by a sampled interval.
struct PushSchedule {
  Range velocity_xy{0.0, 0.0};
  Range interval{3.0, 6.0};
  double next_time = 0.0;
  bool enabled = false;
};

inline PushSchedule make_push_schedule(const DomainRandConfig& config, Rng& rng) {
  PushSchedule schedule;
  schedule.velocity_xy = config.push_velocity_xy;
  schedule.interval = config.push_interval;
  schedule.enabled = true;
  schedule.next_time = sample_range(config.push_interval, rng);
  return schedule;
}

/// Applies any due push. Returns the velocity increment (zero when idle).
inline Vec3 apply_push(SimState& state, PushSchedule& schedule, Rng& rng) {
  if (!schedule.enabled || state.time < schedule.next_time) return Vec3::Zero();
  const Vec3 delta(sample_range(schedule.velocity_xy, rng), sample_range(schedule.velocity_xy, rng), 0.0);
  state.push_velocity += delta;
  schedule.next_time = state.time + sample_range(schedule.interval, rng);
  return delta;
}

enum class Termination {
  kContinue,
  kRootDistance,
  kBodyError,
  kClipEnd,
};

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kContinue: return "continue";
    case Termination::kRootDistance: return "root_distance";
    case Termination::kBodyError: return "body_error";
    case Termination::kClipEnd: return "clip_end";
  }
  return "unknown";
}

/// Mean body error allowed at termination scale 1.0.
inline constexpr double kTerminationBaseBodyError = 0.5;

/// Clip exhaustion ends the episode without penalty; the failure conditions
/// are root drift beyond the distance threshold and mean body error beyond
/// the scale-modulated bound.
inline Termination check_termination(const Vec3& root_pos, const Vec3& ref_root_pos,
                                     const std::vector<Vec3>& body_pos,
                                     const std::vector<Vec3>& ref_body_pos, bool clip_exhausted,
                                     double termination_distance, double termination_scale,
                                     double base_body_error = kTerminationBaseBodyError) {
  require(termination_distance > 0.0 && termination_scale > 0.0 && base_body_error > 0.0,
          "check_termination: thresholds must be positive");
  require(body_pos.size() == ref_body_pos.size() && !body_pos.empty(),
          "check_termination: body array mismatch");
  if (clip_exhausted) return Termination::kClipEnd;
  if ((root_pos - ref_root_pos).norm() > termination_distance) return Termination::kRootDistance;
  double mean_err = 0.0;
  for (size_t i = 0; i < body_pos.size(); ++i) mean_err += (body_pos[i] - ref_body_pos[i]).norm();
  mean_err /= static_cast<double>(body_pos.size());
  if (mean_err > termination_scale * base_body_error) return Termination::kBodyError;
  return Termination::kContinue;
}

/// Desk-scale plant. Joints follow independent second-order dynamics; the
/// root is kinematically driven by a commanded twist plus the decaying push
/// offset. Commands pass through a fixed-length delay FIFO and pick up RFI
/// noise bounded by a fraction of each joint's torque limit.
class Simulator {
 public:
  Simulator(const RobotModel& model, JointDynamics dynamics, SimConfig config,
            RandomizedParams params, uint64_t seed)
      : model_(&model),
        dynamics_(std::move(dynamics)),
        config_(config),
        params_(params),
        rng_(seed) {
    validate_sim_config(config_);
    validate_dynamics(dynamics_, model);
    require(params_.control_delay >= 0, "simulator: control delay must be >= 0");
    reset(VecX::Zero(static_cast<Eigen::Index>(model.joint_count())), RigidTransform{});
  }

  void reset(const VecX& q0, const RigidTransform& root0) {
    const auto n = static_cast<Eigen::Index>(model_->joint_count());
    require(q0.size() == n, "simulator reset: q0 length mismatch");
    state_.q = q0;
    state_.qd = VecX::Zero(n);
    state_.tau_applied = VecX::Zero(n);
    state_.root = root0;
    state_.root_lin_vel = Vec3::Zero();
    state_.root_ang_vel = Vec3::Zero();
    state_.push_velocity = Vec3::Zero();
    state_.time = 0.0;
    state_.steps = 0;
    state_.feet.clear();
    state_.delay_fifo.assign(static_cast<size_t>(params_.control_delay), VecX::Zero(n));
  }

  /// Advances one physics tick. The commanded torque is enqueued; the torque
  /// leaving the FIFO is clamped, noised, re-clamped, and applied.
  void step(const VecX& tau_cmd, const Vec3& root_lin_vel_cmd, const Vec3& root_ang_vel_cmd) {
    const auto n = static_cast<Eigen::Index>(model_->joint_count());
    require(tau_cmd.size() == n, "simulator step: torque length mismatch");
    require(tau_cmd.allFinite(), "simulator step: non-finite torque command");

    state_.delay_fifo.push_back(tau_cmd);
    VecX tau = state_.delay_fifo.front();
    state_.delay_fifo.pop_front();

    const VecX limits = model_->torque_limit();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double limit = limits[j];
      double t = std::clamp(tau[j], -limit, limit);
      const double amp = params_.rfi_limit_scale * config_.rfi_fraction * limit;
      t += rng_.uniform(-amp, amp);
      tau[j] = std::clamp(t, -limit, limit);
      const double friction =
          params_.friction_scale * dynamics_.dry_friction[j];
      const double inertia = params_.link_inertia_scale * dynamics_.inertia[j];
      integrate_joint(state_.q[j], state_.qd[j], tau[j], inertia, dynamics_.damping[j], friction,
                      config_.dt);
    }
    state_.tau_applied = tau;

    state_.root_lin_vel = root_lin_vel_cmd + state_.push_velocity;
    state_.root_ang_vel = root_ang_vel_cmd;
    state_.root.translation += config_.dt * state_.root_lin_vel;
    const double angle = state_.root_ang_vel.norm() * config_.dt;
    if (angle > 0.0) {
      state_.root.rotation =
          (state_.root.rotation * quat_from_axis_angle(state_.root_ang_vel.normalized(), angle))
              .normalized();
    }
    state_.push_velocity *= std::exp(-config_.dt / config_.push_decay_tau);

    state_.time += config_.dt;
    ++state_.steps;
  }

  SimState& state() { return state_; }
  const SimState& state() const { return state_; }
  const RobotModel& model() const { return *model_; }
  const SimConfig& config() const { return config_; }
  const RandomizedParams& params() const { return params_; }
  Rng& rng() { return rng_; }

 private:
  const RobotModel* model_;
  JointDynamics dynamics_;
  SimConfig config_;
  RandomizedParams params_;
  Rng rng_;
  SimState state_;
};

inline nlohmann::json range_to_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

inline Range range_from_json(const nlohmann::json& doc, const std::string& name) {
  require(doc.is_array() && doc.size() == 2, "range '" + name + "' must be a [lo, hi] array");
  Range r{doc[0].get<double>(), doc[1].get<double>()};
  validate_range(r, name);
  return r;
}

inline nlohmann::json dr_config_to_json(const DomainRandConfig& c) {
  return nlohmann::json{{"base_com", range_to_json(c.base_com)},
                        {"link_com", range_to_json(c.link_com)},
                        {"link_mass_scale", range_to_json(c.link_mass_scale)},
                        {"link_inertia_scale", range_to_json(c.link_inertia_scale)},
                        {"pd_gain_scale", range_to_json(c.pd_gain_scale)},
                        {"friction_scale", range_to_json(c.friction_scale)},
                        {"push_velocity_xy", range_to_json(c.push_velocity_xy)},
                        {"push_interval", range_to_json(c.push_interval)},
                        {"rfi_limit_scale", range_to_json(c.rfi_limit_scale)},
                        {"control_delay", range_to_json(c.control_delay)}};
}

inline DomainRandConfig parse_dr_json(const nlohmann::json& doc) {
  DomainRandConfig c;
  auto get = [&](const char* name, Range& out) {
    if (doc.contains(name)) out = range_from_json(doc.at(name), name);
  };
  get("base_com", c.base_com);
  get("link_com", c.link_com);
  get("link_mass_scale", c.link_mass_scale);
  get("link_inertia_scale", c.link_inertia_scale);
  get("pd_gain_scale", c.pd_gain_scale);
  get("friction_scale", c.friction_scale);
  get("push_velocity_xy", c.push_velocity_xy);
  get("push_interval", c.push_interval);
  get("rfi_limit_scale", c.rfi_limit_scale);
  get("control_delay", c.control_delay);
  validate_dr_config(c);
  return c;
}

}  // namespace clot
