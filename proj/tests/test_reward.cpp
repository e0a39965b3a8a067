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

#include "clot/reward.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "clot/rng.hpp"

namespace clot {
namespace {

// Perfectly tracking input: every error zero, mid-range joints, both feet in
// agreeing contact, nothing violated.
RewardInput perfect_input(int nb = 3, int n = 4, int nf = 2, int nk = 2) {
  RewardInput in;
  Rng rng(60);
  for (int i = 0; i < nb; ++i) {
    const Vec3 p(rng.normal(), rng.normal(), rng.normal());
    in.body_pos.push_back(p);
    in.ref_body_pos.push_back(p);
    Quat q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    in.body_quat.push_back(q);
    in.ref_body_quat.push_back(q);
    in.body_lin_vel.emplace_back(Vec3::Zero());
    in.ref_body_lin_vel.emplace_back(Vec3::Zero());
    in.body_ang_vel.emplace_back(Vec3::Zero());
    in.ref_body_ang_vel.emplace_back(Vec3::Zero());
  }
  for (int i = 0; i < nk; ++i) {
    const Vec3 p(rng.normal(), rng.normal(), rng.normal());
    in.keypoint_pos.push_back(p);
    in.ref_keypoint_pos.push_back(p);
  }
  in.pos_lower = VecX::Constant(n, -1.0);
  in.pos_upper = VecX::Constant(n, 1.0);
  in.joint_pos = VecX::Zero(n);  // mid-range
  in.ref_joint_pos = in.joint_pos;
  in.joint_vel = VecX::Zero(n);
  in.ref_joint_vel = VecX::Zero(n);
  in.torque = VecX::Zero(n);
  in.vel_limit = VecX::Constant(n, 10.0);
  in.torque_limit = VecX::Constant(n, 100.0);
  in.action = VecX::Zero(n);
  in.prev_action = VecX::Zero(n);
  in.prev_prev_action = VecX::Zero(n);
  for (int i = 0; i < nf; ++i) {
    FootState foot;
    foot.contact = true;
    foot.ref_contact = true;
    in.feet.push_back(foot);
  }
  return in;
}

RewardInput random_input(Rng& rng, int nb = 3, int n = 4, int nf = 2, int nk = 2) {
  RewardInput in;
  auto v3 = [&] { return Vec3(rng.normal(), rng.normal(), rng.normal()); };
  auto vx = [&](double scale) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
  };
  for (int i = 0; i < nb; ++i) {
    in.body_pos.push_back(v3());
    in.ref_body_pos.push_back(v3());
    Quat a(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    Quat b(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    a.normalize();
    b.normalize();
    in.body_quat.push_back(a);
    in.ref_body_quat.push_back(b);
    in.body_lin_vel.push_back(v3());
    in.ref_body_lin_vel.push_back(v3());
    in.body_ang_vel.push_back(v3());
    in.ref_body_ang_vel.push_back(v3());
  }
  for (int i = 0; i < nk; ++i) {
    in.keypoint_pos.push_back(v3());
    in.ref_keypoint_pos.push_back(v3());
  }
  in.pos_lower = VecX::Constant(n, -1.5);
  in.pos_upper = VecX::Constant(n, 1.5);
  in.joint_pos = vx(1.2);
  in.ref_joint_pos = vx(1.2);
  in.joint_vel = vx(8.0);
  in.ref_joint_vel = vx(8.0);
  in.torque = vx(80.0);
  in.vel_limit = VecX::Constant(n, 6.0);
  in.torque_limit = VecX::Constant(n, 60.0);
  in.action = vx(1.0);
  in.prev_action = vx(1.0);
  in.prev_prev_action = vx(1.0);
  for (int i = 0; i < nf; ++i) {
    FootState foot;
    foot.position = v3();
    foot.ref_position = v3();
    foot.velocity = v3();
    foot.contact = rng.bernoulli(0.5);
    foot.ref_contact = rng.bernoulli(0.5);
    foot.vertical_force = rng.uniform(0.0, 800.0);
    foot.lateral_force = rng.uniform(0.0, 800.0);
    foot.air_time = rng.uniform(0.0, 1.0);
    foot.touchdown = rng.bernoulli(0.3);
    in.feet.push_back(foot);
  }
  in.collision = rng.bernoulli(0.1);
  in.terminated = rng.bernoulli(0.1);
  return in;
}

TEST_CASE("kernel equals 1/e at err == sigma and is monotone decreasing") {
  for (double sigma : {0.01, 0.25, 1.0, 5.0})
    REQUIRE(std::abs(tracking_kernel(sigma, sigma) - std::exp(-1.0)) < 1e-15);
  REQUIRE(tracking_kernel(0.0, 0.25) == 1.0);

  Rng rng(61);
  for (int i = 0; i < 10000; ++i) {
    // Errors sampled in units of sigma, capped where exp(-(err/sigma)^2)
    // still lands in the normal double range so strict ordering is testable.
    const double sigma = rng.uniform(0.01, 5.0);
    const double a = sigma * rng.uniform(0.0, 24.0);
    const double b = a + sigma * rng.uniform(1e-9, 2.0);
    REQUIRE(tracking_kernel(b, sigma) < tracking_kernel(a, sigma));
  }
  REQUIRE_THROWS_AS(tracking_kernel(-0.1, 0.25), Error);
  REQUIRE_THROWS_AS(tracking_kernel(0.1, 0.0), Error);
}

TEST_CASE("zero-error input pays exactly the table weights") {
  const RewardInput in = perfect_input();
  const RewardConfig config;
  const SigmaState sigmas;
  const RewardBreakdown b = compute_rewards(in, config, sigmas);

  REQUIRE(b.weighted_of(RewardTerm::kVrKeypoint) == 1.6);
  REQUIRE(b.weighted_of(RewardTerm::kAlive) == 0.2);
  REQUIRE(b.weighted_of(RewardTerm::kContactConsistency) == 0.5);
  REQUIRE(b.weighted_of(RewardTerm::kJointLimitSatisfaction) == 1.0);
  REQUIRE(b.weighted_of(RewardTerm::kExtBodyPosition) == 1.2);
  REQUIRE(b.weighted_of(RewardTerm::kFeetPosition) == 1.5);
  REQUIRE(b.weighted_of(RewardTerm::kExtBodyOrientation) == 1.5);
  REQUIRE(b.weighted_of(RewardTerm::kExtBodyAngVel) == 0.6);
  REQUIRE(b.weighted_of(RewardTerm::kExtBodyLinVel) == 0.6);
  REQUIRE(b.weighted_of(RewardTerm::kJointPosition) == 1.0);
  REQUIRE(b.weighted_of(RewardTerm::kJointVelocity) == 1.0);
  // All penalties are silent.
  for (int i = kPositiveTermCount; i < kRewardTermCount; ++i)
    REQUIRE(b.weighted[static_cast<size_t>(i)] == 0.0);
  // 10 kernel terms at weight, plus the alive bonus.
  REQUIRE(std::abs(b.total - 10.7) < 1e-12);
}

TEST_CASE("total equals the weighted sum and penalties stay nonpositive") {
  Rng rng(62);
  const RewardConfig config;
  const SigmaState sigmas;
  for (int trial = 0; trial < 100000; ++trial) {
    const RewardInput in = random_input(rng);
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    double sum = 0.0;
    for (double w : b.weighted) sum += w;
    REQUIRE(std::abs(b.total - sum) < 1e-12);
    for (int i = kPositiveTermCount; i < kRewardTermCount; ++i) {
      REQUIRE(b.weighted[static_cast<size_t>(i)] <= 0.0);
      REQUIRE(b.raw[static_cast<size_t>(i)] >= 0.0);
    }
    for (int i = 0; i < kPositiveTermCount; ++i) REQUIRE(b.weighted[static_cast<size_t>(i)] >= 0.0);
  }
}

TEST_CASE("sigma adaptation follows the clamped EMA") {
  REQUIRE(update_sigma(0.25, 1.25, 1e-3, 0.01, 5.0) ==
          Catch::Approx(0.999 * 0.25 + 1e-3 * 1.25).margin(1e-18));
  REQUIRE(update_sigma(0.011, 0.0, 0.5, 0.01, 5.0) == 0.01);   // clamps below
  REQUIRE(update_sigma(4.9, 100.0, 0.5, 0.01, 5.0) == 5.0);    // clamps above
  SigmaState s;
  observe_error(s, RewardTerm::kJointPosition, 2.0);
  REQUIRE(s[RewardTerm::kJointPosition] == Catch::Approx(0.999 * 0.25 + 1e-3 * 2.0));
  REQUIRE(s[RewardTerm::kVrKeypoint] == 0.25);  // others untouched
  REQUIRE_THROWS_AS(observe_error(s, RewardTerm::kAlive, 1.0), Error);
}

TEST_CASE("individual term semantics") {
  const RewardConfig config;
  const SigmaState sigmas;

  SECTION("contact mismatch rate drives contact consistency") {
    RewardInput in = perfect_input();
    in.feet[0].ref_contact = false;  // 1 of 2 mismatched
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.raw_of(RewardTerm::kContactConsistency) ==
            Catch::Approx(tracking_kernel(0.5, 0.25)));
  }

  SECTION("air time pays only at touchdown and beyond the minimum") {
    RewardInput in = perfect_input();
    in.feet[0].air_time = 0.5;
    const double none = compute_rewards(in, config, sigmas).raw_of(RewardTerm::kFeetAirTime);
    REQUIRE(none == 0.0);
    in.feet[0].touchdown = true;
    const double paid = compute_rewards(in, config, sigmas).raw_of(RewardTerm::kFeetAirTime);
    REQUIRE(paid == Catch::Approx(0.3));  // 0.5 - 0.2 minimum
    in.feet[0].air_time = 0.1;            // too short
    REQUIRE(compute_rewards(in, config, sigmas).raw_of(RewardTerm::kFeetAirTime) == 0.0);
  }

  SECTION("termination zeroes alive and fires the flat penalty") {
    RewardInput in = perfect_input();
    in.terminated = true;
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.weighted_of(RewardTerm::kAlive) == 0.0);
    REQUIRE(b.weighted_of(RewardTerm::kEarlyTermination) == -200.0);
  }

  SECTION("collision fires its flat penalty") {
    RewardInput in = perfect_input();
    in.collision = true;
    REQUIRE(compute_rewards(in, config, sigmas).weighted_of(RewardTerm::kCollision) == -30.0);
  }

  SECTION("torque magnitude penalty is the squared norm") {
    RewardInput in = perfect_input();
    in.torque[0] = 3.0;
    in.torque[2] = -4.0;
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.raw_of(RewardTerm::kTorqueLimitViolation) == Catch::Approx(25.0));
    REQUIRE(b.weighted_of(RewardTerm::kTorqueLimitViolation) == Catch::Approx(-25.0e-4));
  }

  SECTION("action rate and smoothness read the action stack") {
    RewardInput in = perfect_input();
    in.action = VecX::Constant(4, 1.0);
    in.prev_action = VecX::Constant(4, 0.5);
    in.prev_prev_action = VecX::Constant(4, 0.5);
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.raw_of(RewardTerm::kActionRate) == Catch::Approx(4 * 0.25));
    REQUIRE(b.raw_of(RewardTerm::kActionSmoothness) == Catch::Approx(4 * 0.25));
  }

  SECTION("slippage counts only feet in contact") {
    RewardInput in = perfect_input();
    in.feet[0].velocity = Vec3(0.3, 0.4, 9.0);  // z is ignored
    in.feet[0].contact = true;
    in.feet[0].ref_contact = true;
    in.feet[1].velocity = Vec3(5.0, 5.0, 0.0);
    in.feet[1].contact = false;
    in.feet[1].ref_contact = false;
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.raw_of(RewardTerm::kFeetSlippage) == Catch::Approx(0.25));
  }

  SECTION("stumble predicate compares lateral to vertical force") {
    RewardInput in = perfect_input();
    in.feet[0].vertical_force = 10.0;
    in.feet[0].lateral_force = 51.0;  // ratio 5 threshold
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.raw_of(RewardTerm::kStumbling) == 1.0);
    REQUIRE(b.weighted_of(RewardTerm::kStumbling) == -20.0);
  }

  SECTION("joint limit satisfaction engages only beyond the activation band") {
    RewardInput in = perfect_input();
    in.joint_pos[0] = 0.85;  // inside the 0.9 band
    REQUIRE(compute_rewards(in, config, sigmas).raw_of(RewardTerm::kJointLimitSatisfaction) == 1.0);
    in.joint_pos[0] = 1.0;  // at the hard limit: normalized overshoot 1
    const double raw = compute_rewards(in, config, sigmas).raw_of(RewardTerm::kJointLimitSatisfaction);
    REQUIRE(raw == Catch::Approx(tracking_kernel(0.25, 0.25)));  // mean over 4 joints
  }

  SECTION("hard limit violations are linear overshoots") {
    RewardInput in = perfect_input();
    in.joint_vel[1] = 12.5;
    const RewardBreakdown b = compute_rewards(in, config, sigmas);
    REQUIRE(b.raw_of(RewardTerm::kJointVelocityLimit) == Catch::Approx(2.5));
    REQUIRE(b.weighted_of(RewardTerm::kJointVelocityLimit) == Catch::Approx(-25.0));
  }
}

TEST_CASE("reward config JSON round trip and validation") {
  RewardConfig config;
  config.weights[static_cast<size_t>(RewardTerm::kVrKeypoint)] = 2.5;
  config.air_time_min = 0.3;
  const nlohmann::json doc = reward_config_to_json(config);
  const RewardConfig back = parse_reward_json(doc);
  REQUIRE(back.weights == config.weights);
  REQUIRE(back.air_time_min == 0.3);

  REQUIRE_THROWS_AS(parse_reward_json(nlohmann::json{{"weights", {{"nonsense", 1.0}}}}), Error);
  // A positive weight on a penalty term violates the sign convention.
  REQUIRE_THROWS_AS(parse_reward_json(nlohmann::json{{"weights", {{"collision", 5.0}}}}), Error);
  RewardConfig bad;
  bad.limit_activation = 1.0;
  REQUIRE_THROWS_AS(validate_reward_config(bad), Error);
}

TEST_CASE("breakdown CSV has one column per term") {
  const std::string header = breakdown_csv_header();
  size_t commas = 0;
  for (char c : header) commas += c == ',' ? 1 : 0;
  REQUIRE(commas == kRewardTermCount);
  const RewardBreakdown b = compute_rewards(perfect_input(), RewardConfig{}, SigmaState{});
  const std::string row = breakdown_csv_row(b);
  commas = 0;
  for (char c : row) commas += c == ',' ? 1 : 0;
  REQUIRE(commas == kRewardTermCount);
}

}  // namespace
}  // namespace clot
