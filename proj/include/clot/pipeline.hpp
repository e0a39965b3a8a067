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
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clot/control.hpp"
#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/kinematics.hpp"
#include "clot/metrics.hpp"
#include "clot/motion_data.hpp"
#include "clot/observation.hpp"
#include "clot/retarget.hpp"
#include "clot/reward.hpp"
#include "clot/rng.hpp"
#include "clot/sim.hpp"

namespace clot {

/// The three loop rates multiplexed on their least common multiple.
struct RateConfig {
  int mocap_hz = 120;
  int control_hz = 50;
  int physics_hz = 400;

  long base_hz() const { return std::lcm(std::lcm(static_cast<long>(mocap_hz), static_cast<long>(control_hz)), static_cast<long>(physics_hz)); }
  long mocap_every() const { return base_hz() / mocap_hz; }
  long control_every() const { return base_hz() / control_hz; }
  long physics_every() const { return base_hz() / physics_hz; }
};

inline void validate_rates(const RateConfig& rates) {
  require(rates.mocap_hz > 0 && rates.control_hz > 0 && rates.physics_hz > 0,
          "rates: all rates must be positive");
}

struct PolicyAction {
  VecX q_target;
  VecX qd_target;  // empty means zero velocity targets
};

/// A policy maps the actor observation and the current reference frame to PD
/// targets. The reference argument exists for baseline policies; a learned
/// policy would read only the observation.
using Policy = std::function<PolicyAction(const VecX& observation, const ReferenceFrame& reference)>;

/// Baseline that emits the retargeted reference joint positions (and the
/// reference velocity estimate when present) as PD targets.
inline Policy reference_follower_policy() {
  return [](const VecX&, const ReferenceFrame& reference) {
    return PolicyAction{reference.q_ref, reference.qd_ref};
  };
}

struct PipelineConfig {
  RateConfig rates;
  RetargetConfig retarget;
  RewardConfig reward;
  SigmaState sigmas;
  SimConfig sim;
  DomainRandConfig dr;
  bool randomize = false;
  JointDynamics dynamics;          // empty vectors select the uniform default
  PDGains gains;                   // empty vectors select name-based defaults
  std::vector<int> foot_frames;    // frame indices treated as feet
  std::vector<int> vr_frames;      // frame indices treated as VR keypoints
  double termination_distance = 2.5;
  double termination_scale = 4.0;
  double duration = -1.0;          // s; non-positive runs to clip end
  double root_servo_kp = 20.0;     // 1/s, linear correction gain
  double root_servo_kp_ang = 20.0; // 1/s, angular correction gain
  int warmup_retarget_frames = 50; // settles warm-start IK before t = 0
};

struct RunReport {
  MetricsReport metrics;
  Termination termination = Termination::kClipEnd;
  double termination_time = 0.0;
  std::array<double, kRewardTermCount> reward_sums{};
  double reward_total = 0.0;
  long reward_steps = 0;
  long base_ticks = 0;
  long mocap_ticks = 0;
  long control_ticks = 0;
  long physics_ticks = 0;
  uint64_t seed = 0;
  std::string config_digest;
};

inline uint64_t fnv1a64(const std::string& text) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

namespace detail {

inline std::string digest_config(const PipelineConfig& c) {
  std::ostringstream os;
  os << c.rates.mocap_hz << ',' << c.rates.control_hz << ',' << c.rates.physics_hz << ','
     << c.randomize << ',' << c.termination_distance << ',' << c.termination_scale << ','
     << c.duration << ',' << c.root_servo_kp << ',' << c.root_servo_kp_ang << ','
     << c.retarget.lambda << ',' << c.retarget.iterations_per_frame;
  for (const auto& m : c.retarget.mappings) os << ',' << m.keypoint << ':' << m.frame << ':' << m.weight << ':' << m.scale;
  for (double w : c.reward.weights) os << ',' << w;
  for (int f : c.foot_frames) os << ",f" << f;
  for (int f : c.vr_frames) os << ",v" << f;
  std::ostringstream hex;
  hex << std::hex << fnv1a64(os.str());
  return hex.str();
}

/// World twist command steering the kinematic root toward the reference:
/// feedforward from the reference's own motion plus proportional correction.
struct RootCommand {
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();  // body frame
};

inline RootCommand root_servo(const RigidTransform& current, const RigidTransform& target_now,
                              const RigidTransform& target_next, double dt, double kp_lin,
                              double kp_ang) {
  RootCommand cmd;
  cmd.lin_vel = (target_next.translation - target_now.translation) / dt +
                kp_lin * (target_now.translation - current.translation);
  const Quat rel_err = current.rotation.conjugate() * target_now.rotation;
  Eigen::AngleAxisd err(rel_err.normalized());
  const Quat rel_ff = target_now.rotation.conjugate() * target_next.rotation;
  Eigen::AngleAxisd ff(rel_ff.normalized());
  cmd.ang_vel = ff.angle() / dt * ff.axis() + kp_ang * err.angle() * err.axis();
  return cmd;
}

}  // namespace detail

/// Runs the lockstep closed loop on one clip: mocap ticks ingest interpolated
/// human frames, control ticks retarget and query the policy with an
/// unshifted observation, physics ticks apply PD torques to the plant.
/// Deterministic for a given (model, clip, config, seed). When `trajectory`
/// is non-null it receives the per-control-tick robot/reference pair that the
/// metrics were computed from; when `observations` is non-null it receives
/// the actor observation handed to the policy at each control tick.
inline RunReport run_closed_loop(const RobotModel& model, const MotionClip& clip,
                                 const PipelineConfig& config, const Policy& policy, uint64_t seed,
                                 TrajectoryPair* trajectory = nullptr,
                                 std::vector<VecX>* observations = nullptr) {
  validate_rates(config.rates);
  validate_retarget_config(config.retarget, model);
  validate_reward_config(config.reward);
  validate_sim_config(config.sim);
  validate_clip(clip);
  require(static_cast<bool>(policy), "run_closed_loop: null policy");

  const int n = model.joint_count();
  const std::vector<int> bodies = model.body_frames();
  const size_t nb = bodies.size();
  for (int f : config.foot_frames)
    require(f >= 0 && f < model.frame_count() && f != model.root_frame(),
            "run_closed_loop: invalid foot frame index");
  for (int f : config.vr_frames)
    require(f >= 0 && f < model.frame_count(), "run_closed_loop: invalid VR frame index");

  const JointDynamics dynamics =
      config.dynamics.inertia.size() > 0 ? config.dynamics : uniform_dynamics(n, 0.05, 0.5, 0.02);
  PDGains gains = config.gains.kp.size() > 0 ? config.gains : default_gains_by_name(model);
  require(gains.kp.size() == n && gains.kd.size() == n, "run_closed_loop: gain length mismatch");

  Rng rng(seed);
  const RandomizedParams params =
      config.randomize ? sample_randomization(config.dr, rng) : identity_params();
  gains.kp *= params.kp_scale;
  gains.kd *= params.kd_scale;
  PushSchedule pushes;
  if (config.randomize) pushes = make_push_schedule(config.dr, rng);
  Rng push_rng = rng.split(1);

  Simulator sim(model, dynamics, config.sim, params, rng.next_u64());

  const double clip_start = clip.frames.front().t;
  const double duration = config.duration > 0.0 ? config.duration : clip.duration();
  const long base_hz = config.rates.base_hz();
  const long total_ticks = std::llround(duration * static_cast<double>(base_hz));
  const double dt_control = 1.0 / config.rates.control_hz;
  const double dt_physics = 1.0 / config.rates.physics_hz;

  // Settle the warm-started IK on the first frame so t = 0 starts converged.
  MotionFrame latest_human = sample_frame(clip, clip_start);
  RigidTransform ref_root = reference_root_from_human(latest_human.root);
  VecX q_ref = model.clamp_to_position_limits(VecX::Zero(n));
  for (int i = 0; i < config.warmup_retarget_frames; ++i)
    q_ref = retarget_frame(model, q_ref, ref_root, latest_human.keypoints, config.retarget, dt_control);
  sim.reset(q_ref, ref_root);

  HistoryBuffer history(n, static_cast<int>(nb));
  ReferenceBodyTrack reference_track;
  VecX prev_action = q_ref;
  VecX prev_prev_action = q_ref;
  VecX prev_q_ref = q_ref;

  std::vector<Vec3> prev_sim_body(nb, Vec3::Zero()), prev_ref_body(nb, Vec3::Zero());
  std::vector<Quat> prev_sim_quat(nb, Quat::Identity()), prev_ref_quat(nb, Quat::Identity());
  std::vector<Vec3> prev_foot_pos(config.foot_frames.size(), Vec3::Zero());
  std::vector<bool> prev_foot_contact(config.foot_frames.size(), false);
  std::vector<double> foot_air_time(config.foot_frames.size(), 0.0);
  bool have_prev_control = false;

  PDCommand command = PDCommand::position_only(q_ref);
  TrajectoryPair pair;
  RunReport report;
  report.seed = seed;
  report.config_digest = detail::digest_config(config);
  report.base_ticks = total_ticks;
  report.termination = Termination::kContinue;

  for (long tick = 0; tick < total_ticks; ++tick) {
    const double t = clip_start + static_cast<double>(tick) / static_cast<double>(base_hz);

    if (tick % config.rates.mocap_every() == 0) {
      latest_human = sample_frame(clip, t);
      ++report.mocap_ticks;
    }

    if (tick % config.rates.control_every() == 0) {
      ref_root = reference_root_from_human(latest_human.root);
      q_ref = retarget_frame(model, q_ref, ref_root, latest_human.keypoints, config.retarget,
                             dt_control);
      const auto ref_poses = forward_kinematics(model, ref_root, q_ref);
      const auto sim_poses = forward_kinematics(model, sim.state().root, sim.state().q);

      ReferenceFrame reference;
      reference.root = ref_root;
      reference.q_ref = q_ref;
      reference.qd_ref = have_prev_control ? VecX(((q_ref - prev_q_ref) / dt_control).eval())
                                           : VecX(VecX::Zero(n));
      std::vector<Vec3> ref_body(nb), sim_body(nb);
      std::vector<Quat> ref_quat(nb), sim_quat(nb);
      for (size_t b = 0; b < nb; ++b) {
        const size_t f = static_cast<size_t>(bodies[b]);
        ref_body[b] = ref_poses[f].translation;
        ref_quat[b] = ref_poses[f].rotation;
        sim_body[b] = sim_poses[f].translation;
        sim_quat[b] = sim_poses[f].rotation;
      }
      reference.frame_positions = ref_body;
      reference_track.push_back(ref_body);

      // Inference mode: the pre-shift is disabled, delta must be zero.
      const int delta = 0;
      require(delta == 0, "run_closed_loop: pre-shift must stay disabled at inference");
      const GoalWindow goal = build_goal_window(reference_track, sim_body,
                                                static_cast<long>(reference_track.size()) - 1, delta);

      ProprioState proprio;
      proprio.base_ang_vel = sim.state().root_ang_vel;
      proprio.projected_gravity = projected_gravity(sim.state().root.rotation);
      proprio.dof_pos = sim.state().q;
      proprio.dof_vel = sim.state().qd;
      proprio.prev_action = prev_action;
      const VecX observation = assemble_actor_obs(proprio, history, goal);
      if (observations != nullptr) observations->push_back(observation);

      const PolicyAction action = policy(observation, reference);
      require(action.q_target.size() == n, "run_closed_loop: policy action length mismatch");
      command = action.qd_target.size() == n ? PDCommand{action.q_target, action.qd_target}
                                             : PDCommand::position_only(action.q_target);

      HistoryEntry entry;
      entry.base_ang_vel = proprio.base_ang_vel;
      entry.projected_gravity = proprio.projected_gravity;
      entry.dof_pos = proprio.dof_pos;
      entry.dof_vel = proprio.dof_vel;
      entry.body_pos = sim_body;
      entry.dif_pos.resize(nb);
      for (size_t b = 0; b < nb; ++b) entry.dif_pos[b] = ref_body[b] - sim_body[b];
      entry.action = action.q_target;
      history.push(entry);

      TrajectoryStep robot_step, ref_step;
      robot_step.body_pos = sim_body;
      robot_step.root = sim.state().root;
      robot_step.joint_pos = sim.state().q;
      robot_step.torque = sim.state().tau_applied;
      ref_step.body_pos = ref_body;
      ref_step.root = ref_root;
      ref_step.joint_pos = q_ref;
      pair.robot.push_back(std::move(robot_step));
      pair.reference.push_back(std::move(ref_step));

      const Termination verdict = check_termination(
          sim.state().root.translation, ref_root.translation, sim_body, ref_body,
          /*clip_exhausted=*/false, config.termination_distance, config.termination_scale);
      const bool terminated = verdict != Termination::kContinue;

      if (!config.foot_frames.empty()) {
        RewardInput input;
        input.body_pos = sim_body;
        input.ref_body_pos = ref_body;
        input.body_quat = sim_quat;
        input.ref_body_quat = ref_quat;
        input.body_lin_vel.resize(nb);
        input.ref_body_lin_vel.resize(nb);
        input.body_ang_vel.resize(nb);
        input.ref_body_ang_vel.resize(nb);
        for (size_t b = 0; b < nb; ++b) {
          if (have_prev_control) {
            input.body_lin_vel[b] = (sim_body[b] - prev_sim_body[b]) / dt_control;
            input.ref_body_lin_vel[b] = (ref_body[b] - prev_ref_body[b]) / dt_control;
            const Eigen::AngleAxisd sim_rel((prev_sim_quat[b].conjugate() * sim_quat[b]).normalized());
            const Eigen::AngleAxisd ref_rel((prev_ref_quat[b].conjugate() * ref_quat[b]).normalized());
            input.body_ang_vel[b] = sim_rel.angle() / dt_control * sim_rel.axis();
            input.ref_body_ang_vel[b] = ref_rel.angle() / dt_control * ref_rel.axis();
          } else {
            input.body_lin_vel[b] = Vec3::Zero();
            input.ref_body_lin_vel[b] = Vec3::Zero();
            input.body_ang_vel[b] = Vec3::Zero();
            input.ref_body_ang_vel[b] = Vec3::Zero();
          }
        }
        const std::vector<int>& vr =
            config.vr_frames.empty() ? config.foot_frames : config.vr_frames;
        for (int f : vr) {
          input.keypoint_pos.push_back(sim_poses[static_cast<size_t>(f)].translation);
          input.ref_keypoint_pos.push_back(ref_poses[static_cast<size_t>(f)].translation);
        }
        input.joint_pos = sim.state().q;
        input.ref_joint_pos = q_ref;
        input.joint_vel = sim.state().qd;
        input.ref_joint_vel = have_prev_control ? VecX(((q_ref - prev_q_ref) / dt_control).eval())
                                                : VecX(VecX::Zero(n));
        input.torque = sim.state().tau_applied;
        input.pos_lower = model.position_lower();
        input.pos_upper = model.position_upper();
        input.vel_limit = model.velocity_limit();
        input.torque_limit = model.torque_limit();
        input.action = action.q_target;
        input.prev_action = prev_action;
        input.prev_prev_action = prev_prev_action;
        for (size_t i = 0; i < config.foot_frames.size(); ++i) {
          const size_t f = static_cast<size_t>(config.foot_frames[i]);
          FootState foot;
          foot.position = sim_poses[f].translation;
          foot.ref_position = ref_poses[f].translation;
          foot.velocity = have_prev_control ? Vec3(((foot.position - prev_foot_pos[i]) / dt_control).eval())
                                            : Vec3(Vec3::Zero());
          const double slip = foot.velocity.head<2>().norm();
          const ContactInfo contact = foot_contact(foot.position.z(), slip, config.sim);
          foot.contact = contact.contact;
          foot.vertical_force = contact.normal_force;
          foot.lateral_force = contact.lateral_force;
          const ContactInfo ref_contact = foot_contact(foot.ref_position.z(), 0.0, config.sim);
          foot.ref_contact = ref_contact.contact;
          foot.touchdown = contact.contact && !prev_foot_contact[i] && have_prev_control;
          foot.air_time = foot_air_time[i];
          input.feet.push_back(foot);
          prev_foot_pos[i] = sim_poses[f].translation;
          prev_foot_contact[i] = contact.contact;
          foot_air_time[i] = contact.contact ? 0.0 : foot_air_time[i] + dt_control;
        }
        input.collision = false;
        input.terminated = terminated && verdict != Termination::kClipEnd;

        const RewardBreakdown breakdown = compute_rewards(input, config.reward, config.sigmas);
        for (int i = 0; i < kRewardTermCount; ++i)
          report.reward_sums[static_cast<size_t>(i)] += breakdown.weighted[static_cast<size_t>(i)];
        report.reward_total += breakdown.total;
        ++report.reward_steps;
      }

      prev_sim_body = sim_body;
      prev_ref_body = ref_body;
      prev_sim_quat = sim_quat;
      prev_ref_quat = ref_quat;
      prev_q_ref = q_ref;
      prev_prev_action = prev_action;
      prev_action = action.q_target;
      have_prev_control = true;
      ++report.control_ticks;

      if (terminated) {
        report.termination = verdict;
        report.termination_time = t;
        break;
      }
    }

    if (tick % config.rates.physics_every() == 0) {
      const VecX raw = pd_torque(command, JointState{sim.state().q, sim.state().qd}, gains);
      const ClampedTorque clamped = clamp_torque(raw, model);

      const RigidTransform target_now = reference_root_from_human(sample_frame(clip, t).root);
      const RigidTransform target_next =
          reference_root_from_human(sample_frame(clip, t + dt_physics).root);
      const detail::RootCommand root_cmd =
          detail::root_servo(sim.state().root, target_now, target_next, dt_physics,
                             config.root_servo_kp, config.root_servo_kp_ang);

      if (config.randomize) apply_push(sim.state(), pushes, push_rng);
      sim.step(clamped.torque, root_cmd.lin_vel, root_cmd.ang_vel);
      ++report.physics_ticks;
    }
  }

  if (report.termination == Termination::kContinue) {
    report.termination = Termination::kClipEnd;
    report.termination_time = clip_start + duration;
  }
  report.metrics = compute_metrics(pair);
  if (trajectory != nullptr) *trajectory = std::move(pair);
  return report;
}

inline nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json rewards;
  for (int i = 0; i < kRewardTermCount; ++i)
    rewards[kRewardTermNames[static_cast<size_t>(i)]] = report.reward_sums[static_cast<size_t>(i)];
  return nlohmann::json{
      {"metrics", metrics_to_json(report.metrics)},
      {"termination", termination_name(report.termination)},
      {"termination_time", report.termination_time},
      {"rewards", rewards},
      {"reward_total", report.reward_total},
      {"reward_steps", report.reward_steps},
      {"ticks",
       {{"base", report.base_ticks},
        {"mocap", report.mocap_ticks},
        {"control", report.control_ticks},
        {"physics", report.physics_ticks}}},
      {"seed", report.seed},
      {"config_digest", report.config_digest}};
}

}  // namespace clot
