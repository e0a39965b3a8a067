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

#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/rng.hpp"

namespace clot {

inline constexpr int kHistoryLen = 10;
inline constexpr int kGoalLen = 10;

/// Proprioceptive snapshot at the true current control step.
struct ProprioState {
  Vec3 base_ang_vel = Vec3::Zero();
  Vec3 projected_gravity = Vec3::Zero();
  VecX dof_pos;
  VecX dof_vel;
  VecX prev_action;
};

/// One past control step as remembered by the history buffer.
struct HistoryEntry {
  Vec3 base_ang_vel = Vec3::Zero();
  Vec3 projected_gravity = Vec3::Zero();
  VecX dof_pos;
  VecX dof_vel;
  std::vector<Vec3> dif_pos;   // reference minus actual body positions
  std::vector<Vec3> body_pos;  // actual body positions
  VecX action;
};

inline HistoryEntry zero_history_entry(int n_joints, int n_bodies) {
  HistoryEntry e;
  e.dof_pos = VecX::Zero(n_joints);
  e.dof_vel = VecX::Zero(n_joints);
  e.dif_pos.assign(static_cast<size_t>(n_bodies), Vec3::Zero());
  e.body_pos.assign(static_cast<size_t>(n_bodies), Vec3::Zero());
  e.action = VecX::Zero(n_joints);
  return e;
}

/// Fixed-capacity window of the last kHistoryLen steps, zero-filled at
/// episode start so the observation layout never changes length. Entries are
/// kept oldest first.
class HistoryBuffer {
 public:
  HistoryBuffer(int n_joints, int n_bodies) : n_joints_(n_joints), n_bodies_(n_bodies) {
    require(n_joints > 0 && n_bodies > 0, "HistoryBuffer: dimensions must be positive");
    for (int i = 0; i < kHistoryLen; ++i) entries_.push_back(zero_history_entry(n_joints, n_bodies));
  }

  void push(const HistoryEntry& entry) {
    require(entry.dof_pos.size() == n_joints_ && entry.dof_vel.size() == n_joints_ &&
                entry.action.size() == n_joints_,
            "HistoryBuffer: joint dimension mismatch");
    require(entry.dif_pos.size() == static_cast<size_t>(n_bodies_) &&
                entry.body_pos.size() == static_cast<size_t>(n_bodies_),
            "HistoryBuffer: body dimension mismatch");
    entries_.pop_front();
    entries_.push_back(entry);
    ++pushes_;
  }

  void reset() {
    entries_.clear();
    for (int i = 0; i < kHistoryLen; ++i) entries_.push_back(zero_history_entry(n_joints_, n_bodies_));
    pushes_ = 0;
  }

  const std::deque<HistoryEntry>& entries() const { return entries_; }
  int joint_count() const { return n_joints_; }
  int body_count() const { return n_bodies_; }
  long pushes() const { return pushes_; }

 private:
  int n_joints_;
  int n_bodies_;
  long pushes_ = 0;
  std::deque<HistoryEntry> entries_;
};

/// Reference body positions for the ten upcoming control steps, already
/// clamped at the clip end, plus their differences to the current body pose.
struct GoalWindow {
  std::vector<std::vector<Vec3>> ref_pos;  // kGoalLen x N_b
  std::vector<std::vector<Vec3>> dif_pos;  // kGoalLen x N_b
};

/// Reference body positions per control step; outer index is the step.
using ReferenceBodyTrack = std::vector<std::vector<Vec3>>;

/// Temporal offset applied to the goal window only. With apply_probability
/// the offset is a uniform integer number of control steps in
/// [0, round(t_max_pre * control_fps)]; otherwise zero.
inline int sample_preshift(Rng& rng, double apply_probability, double t_max_pre, double control_fps) {
  require(apply_probability >= 0.0 && apply_probability <= 1.0,
          "sample_preshift: apply_probability outside [0,1]");
  require(t_max_pre >= 0.0, "sample_preshift: t_max_pre must be >= 0");
  require(control_fps > 0.0, "sample_preshift: control_fps must be > 0");
  const long max_steps = std::llround(t_max_pre * control_fps);
  if (max_steps == 0) return 0;
  if (!rng.bernoulli(apply_probability)) return 0;
  return static_cast<int>(rng.uniform_int(0, max_steps));
}

/// Reads the goal window at steps t+1+delta ... t+kGoalLen+delta, holding the
/// final reference frame past the end of the track.
inline GoalWindow build_goal_window(const ReferenceBodyTrack& reference,
                                    const std::vector<Vec3>& body_pos_now, long t, int delta) {
  require(!reference.empty(), "build_goal_window: empty reference track");
  require(t >= 0 && delta >= 0, "build_goal_window: negative time or offset");
  const size_t nb = body_pos_now.size();
  require(nb > 0, "build_goal_window: no bodies");
  for (const auto& frame : reference)
    require(frame.size() == nb, "build_goal_window: reference body count mismatch");
  const long last = static_cast<long>(reference.size()) - 1;
  GoalWindow window;
  window.ref_pos.resize(kGoalLen);
  window.dif_pos.resize(kGoalLen);
  for (int k = 0; k < kGoalLen; ++k) {
    const long idx = std::min(t + 1 + delta + k, last);
    window.ref_pos[static_cast<size_t>(k)] = reference[static_cast<size_t>(idx)];
    auto& dif = window.dif_pos[static_cast<size_t>(k)];
    dif.resize(nb);
    for (size_t b = 0; b < nb; ++b) dif[b] = reference[static_cast<size_t>(idx)][b] - body_pos_now[b];
  }
  return window;
}

struct ObsBlock {
  std::string name;
  long size = 0;
};

inline std::vector<ObsBlock> actor_layout(int n_joints, int n_bodies) {
  const long n = n_joints;
  const long body3 = 3L * n_bodies;
  return {
      {"last_action", n},
      {"base_ang", 3},
      {"dof_pos", n},
      {"dof_vel", n},
      {"future_dif_pos", kGoalLen * body3},
      {"future_ref_pos", kGoalLen * body3},
      {"history_base_ang", kHistoryLen * 3L},
      {"history_projected_gravity", kHistoryLen * 3L},
      {"history_dof_pos", kHistoryLen * n},
      {"history_dof_vel", kHistoryLen * n},
      {"history_dif_pos", kHistoryLen * body3},
      {"history_body_pos", kHistoryLen * body3},
      {"history_actions", kHistoryLen * n},
  };
}

inline long actor_obs_size(int n_joints, int n_bodies) {
  long total = 0;
  for (const auto& block : actor_layout(n_joints, n_bodies)) total += block.size;
  return total;
}

namespace detail {

inline void append(VecX& out, long& cursor, const Vec3& v) {
  out.segment<3>(cursor) = v;
  cursor += 3;
}

inline void append(VecX& out, long& cursor, const VecX& v) {
  out.segment(cursor, v.size()) = v;
  cursor += v.size();
}

inline void append(VecX& out, long& cursor, const std::vector<Vec3>& v) {
  for (const auto& p : v) append(out, cursor, p);
}

}  // namespace detail

/// Concatenates the actor observation in the fixed block order of
/// actor_layout(). Only the two future blocks depend on the pre-shift; every
/// proprio and history block reads the true current step.
inline VecX assemble_actor_obs(const ProprioState& proprio, const HistoryBuffer& history,
                               const GoalWindow& goal) {
  const int n = history.joint_count();
  const int nb = history.body_count();
  require(proprio.dof_pos.size() == n && proprio.dof_vel.size() == n &&
              proprio.prev_action.size() == n,
          "assemble_actor_obs: proprio dimension mismatch");
  require(static_cast<int>(goal.ref_pos.size()) == kGoalLen &&
              static_cast<int>(goal.dif_pos.size()) == kGoalLen,
          "assemble_actor_obs: goal window must cover exactly kGoalLen steps");
  for (int k = 0; k < kGoalLen; ++k)
    require(goal.ref_pos[static_cast<size_t>(k)].size() == static_cast<size_t>(nb) &&
                goal.dif_pos[static_cast<size_t>(k)].size() == static_cast<size_t>(nb),
            "assemble_actor_obs: goal window body count mismatch");

  VecX out = VecX::Zero(actor_obs_size(n, nb));
  long cursor = 0;
  detail::append(out, cursor, proprio.prev_action);
  detail::append(out, cursor, proprio.base_ang_vel);
  detail::append(out, cursor, proprio.dof_pos);
  detail::append(out, cursor, proprio.dof_vel);
  for (const auto& step : goal.dif_pos) detail::append(out, cursor, step);
  for (const auto& step : goal.ref_pos) detail::append(out, cursor, step);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.base_ang_vel);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.projected_gravity);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.dof_pos);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.dof_vel);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.dif_pos);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.body_pos);
  for (const auto& e : history.entries()) detail::append(out, cursor, e.action);
  require(cursor == out.size(), "assemble_actor_obs: layout mismatch");
  return out;
}

/// Privileged quantities the critic sees and the actor does not. Zero when
/// no randomization or push is active.
struct PrivilegedState {
  Vec3 root_lin_vel = Vec3::Zero();
  Vec3 push_velocity = Vec3::Zero();
  VecX dr_params;
};

inline long critic_obs_size(int n_joints, int n_bodies, long dr_param_count) {
  return actor_obs_size(n_joints, n_bodies) + 6 + dr_param_count;
}

/// Critic observation: the unshifted actor observation followed by the
/// privileged block. The goal window here must be built with delta = 0.
inline VecX assemble_critic_obs(const ProprioState& proprio, const HistoryBuffer& history,
                                const GoalWindow& goal, const PrivilegedState& privileged) {
  const VecX actor = assemble_actor_obs(proprio, history, goal);
  VecX out = VecX::Zero(actor.size() + 6 + privileged.dr_params.size());
  long cursor = 0;
  detail::append(out, cursor, actor);
  detail::append(out, cursor, privileged.root_lin_vel);
  detail::append(out, cursor, privileged.push_velocity);
  if (privileged.dr_params.size() > 0) detail::append(out, cursor, privileged.dr_params);
  require(cursor == out.size(), "assemble_critic_obs: layout mismatch");
  return out;
}

}  // namespace clot
