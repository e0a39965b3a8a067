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

#include "clot/sim.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "clot/synthetic.hpp"

namespace clot {
namespace {

RobotModel make_single_joint() {
  std::vector<JointSpec> joints;
  JointSpec j;
  j.name = "wheel";
  j.axis = Vec3::UnitY();
  j.pos_lo = -1e9;
  j.pos_hi = 1e9;
  j.vel_limit = 1e9;
  j.torque_limit = 1e9;
  joints.push_back(j);
  std::vector<FrameSpec> frames;
  frames.push_back({"root", -1, RigidTransform{}});
  frames.push_back({"wheel", 0, RigidTransform{}});
  return RobotModel("single_joint", std::move(joints), std::move(frames));
}

TEST_CASE("constant torque on a damped joint matches the closed form") {
  const RobotModel model = make_single_joint();
  const double inertia = 0.05;
  const double damping = 0.5;
  const double tau = 1.0;
  JointDynamics dyn = uniform_dynamics(1, inertia, damping, 0.0);
  SimConfig config;  // dt = 1/400
  Simulator sim(model, dyn, config, identity_params(), 1);

  for (int k = 0; k < 400; ++k)
    sim.step(VecX::Constant(1, tau), Vec3::Zero(), Vec3::Zero());

  // I qdd = tau - b qd from rest: qd = (tau/b)(1 - e^{-bt/I}).
  const double t = 1.0;
  const double c = damping / inertia;
  const double qd_exact = (tau / damping) * (1.0 - std::exp(-c * t));
  const double q_exact = (tau / damping) * (t - (1.0 / c) * (1.0 - std::exp(-c * t)));
  REQUIRE(std::abs(sim.state().qd[0] - qd_exact) < 1e-3);
  REQUIRE(std::abs(sim.state().q[0] - q_exact) < 2e-3);
  REQUIRE(sim.state().steps == 400);
  REQUIRE(sim.state().time == Catch::Approx(1.0));
}

TEST_CASE("kinetic energy never grows without input") {
  const RobotModel model = make_single_joint();
  JointDynamics dyn = uniform_dynamics(1, 0.05, 0.5, 0.02);
  Simulator sim(model, dyn, SimConfig{}, identity_params(), 2);
  RigidTransform root;
  sim.reset(VecX::Zero(1), root);
  sim.state().qd[0] = 3.0;

  double prev = 0.5 * 0.05 * 9.0;
  for (int k = 0; k < 2000; ++k) {
    sim.step(VecX::Zero(1), Vec3::Zero(), Vec3::Zero());
    const double energy = 0.5 * 0.05 * sim.state().qd[0] * sim.state().qd[0];
    REQUIRE(energy <= prev);
    REQUIRE(sim.state().qd[0] >= 0.0);  // friction clamps at zero, never reverses
    prev = energy;
  }
  REQUIRE(sim.state().qd[0] == 0.0);  // dry friction parks the joint exactly
}

TEST_CASE("static friction holds a joint below breakaway torque") {
  const RobotModel model = make_single_joint();
  JointDynamics dyn = uniform_dynamics(1, 0.05, 0.0, 0.5);
  Simulator sim(model, dyn, SimConfig{}, identity_params(), 3);
  for (int k = 0; k < 100; ++k)
    sim.step(VecX::Constant(1, 0.4), Vec3::Zero(), Vec3::Zero());  // 0.4 < 0.5
  REQUIRE(sim.state().qd[0] == 0.0);
  REQUIRE(sim.state().q[0] == 0.0);
}

TEST_CASE("control delay shifts the applied torque by whole steps") {
  const RobotModel model = make_single_joint();
  JointDynamics dyn = uniform_dynamics(1, 0.05, 0.0, 0.0);
  RandomizedParams params = identity_params();
  params.control_delay = 2;
  Simulator sim(model, dyn, SimConfig{}, params, 4);

  for (int k = 0; k < 8; ++k) {
    sim.step(VecX::Constant(1, static_cast<double>(k + 1)), Vec3::Zero(), Vec3::Zero());
    const double expected = k < 2 ? 0.0 : static_cast<double>(k - 1);  // fifo preloads zeros
    REQUIRE(sim.state().tau_applied[0] == expected);
  }

  // Reset refills the FIFO with zeros.
  sim.reset(VecX::Zero(1), RigidTransform{});
  sim.step(VecX::Constant(1, 7.0), Vec3::Zero(), Vec3::Zero());
  REQUIRE(sim.state().tau_applied[0] == 0.0);

  // Zero delay applies immediately.
  Simulator direct(model, dyn, SimConfig{}, identity_params(), 5);
  direct.step(VecX::Constant(1, 7.0), Vec3::Zero(), Vec3::Zero());
  REQUIRE(direct.state().tau_applied[0] == 7.0);
}

TEST_CASE("torque noise stays inside the randomized-injection bound") {
  std::vector<JointSpec> joints;
  JointSpec j;
  j.name = "arm";
  j.torque_limit = 50.0;
  j.pos_lo = -10.0;
  j.pos_hi = 10.0;
  joints.push_back(j);
  std::vector<FrameSpec> frames{{"root", -1, RigidTransform{}}, {"arm", 0, RigidTransform{}}};
  const RobotModel model("one_arm", std::move(joints), std::move(frames));

  RandomizedParams params = identity_params();
  params.rfi_limit_scale = 1.5;
  SimConfig config;  // rfi_fraction 0.01 -> amplitude 0.75
  Simulator sim(model, uniform_dynamics(1, 0.1, 0.0, 0.0), config, params, 6);
  bool saw_noise = false;
  for (int k = 0; k < 500; ++k) {
    sim.step(VecX::Constant(1, 10.0), Vec3::Zero(), Vec3::Zero());
    const double applied = sim.state().tau_applied[0];
    REQUIRE(std::abs(applied - 10.0) <= 0.75 + 1e-12);
    REQUIRE(std::abs(applied) <= 50.0);
    saw_noise = saw_noise || applied != 10.0;
  }
  REQUIRE(saw_noise);

  // Identity parameters inject nothing.
  Simulator clean(model, uniform_dynamics(1, 0.1, 0.0, 0.0), config, identity_params(), 7);
  clean.step(VecX::Constant(1, 10.0), Vec3::Zero(), Vec3::Zero());
  REQUIRE(clean.state().tau_applied[0] == 10.0);
}

TEST_CASE("root follows the commanded twist") {
  const RobotModel model = make_single_joint();
  Simulator sim(model, uniform_dynamics(1, 0.05, 0.5, 0.0), SimConfig{}, identity_params(), 8);
  const Vec3 v(0.4, -0.2, 0.1);
  for (int k = 0; k < 400; ++k) sim.step(VecX::Zero(1), v, Vec3::Zero());
  REQUIRE((sim.state().root.translation - v).norm() < 1e-9);

  sim.reset(VecX::Zero(1), RigidTransform{});
  const Vec3 w(0.0, 0.0, 0.5);
  for (int k = 0; k < 400; ++k) sim.step(VecX::Zero(1), Vec3::Zero(), w);
  REQUIRE(std::abs(yaw_of(sim.state().root.rotation) - 0.5) < 1e-9);
}

TEST_CASE("domain randomization draws stay in range with centered means") {
  const DomainRandConfig config;
  Rng rng(9);
  const int kDraws = 100000;
  // Flattened params: 3x base com, 3x link com, mass, inertia, kp, kd,
  // friction, rfi, delay.
  std::array<Range, 13> ranges = {config.base_com,          config.base_com,
                                  config.base_com,          config.link_com,
                                  config.link_com,          config.link_com,
                                  config.link_mass_scale,   config.link_inertia_scale,
                                  config.pd_gain_scale,     config.pd_gain_scale,
                                  config.friction_scale,    config.rfi_limit_scale,
                                  config.control_delay};
  VecX sum = VecX::Zero(13);
  for (int k = 0; k < kDraws; ++k) {
    const RandomizedParams p = sample_randomization(config, rng);
    const VecX flat = p.flatten();
    REQUIRE(flat.size() == kDrParamCount);
    for (int i = 0; i < 13; ++i) {
      REQUIRE(flat[i] >= ranges[static_cast<size_t>(i)].lo);
      REQUIRE(flat[i] <= ranges[static_cast<size_t>(i)].hi);
    }
    sum += flat;
  }
  for (int i = 0; i < 13; ++i) {
    const Range& r = ranges[static_cast<size_t>(i)];
    const double mid = 0.5 * (r.lo + r.hi);
    // Uniform variance (hi-lo)^2/12; the rounded delay has variance 0.5.
    const double var = i == 12 ? 0.5 : (r.hi - r.lo) * (r.hi - r.lo) / 12.0;
    const double sigma = std::sqrt(var / kDraws);
    REQUIRE(std::abs(sum[i] / kDraws - mid) < 3.0 * sigma);
  }
}

TEST_CASE("degenerate ranges return the point value without drawing") {
  Rng a(10), b(10);
  REQUIRE(sample_range(Range{5.0, 5.0}, a) == 5.0);
  // The generator was not consumed: both streams still agree.
  REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("foot contact proxy") {
  const SimConfig config;  // height 0.02, stiffness 2e4, lateral 50
  const ContactInfo on = foot_contact(0.01, 0.3, config);
  REQUIRE(on.contact);
  REQUIRE(on.normal_force == Catch::Approx(200.0));
  REQUIRE(on.lateral_force == Catch::Approx(15.0));
  const ContactInfo off = foot_contact(0.02, 0.3, config);
  REQUIRE_FALSE(off.contact);
  REQUIRE(off.normal_force == 0.0);
  REQUIRE(off.lateral_force == 0.0);
}

TEST_CASE("push schedule fires on time and decays") {
  DomainRandConfig config;
  Rng rng(11);
  PushSchedule schedule = make_push_schedule(config, rng);
  REQUIRE(schedule.enabled);
  REQUIRE(schedule.next_time >= 3.0);
  REQUIRE(schedule.next_time <= 6.0);

  SimState state;
  state.time = schedule.next_time - 0.01;
  REQUIRE(apply_push(state, schedule, rng) == Vec3::Zero());
  REQUIRE(state.push_velocity == Vec3::Zero());

  state.time = schedule.next_time;
  const double fired_at = schedule.next_time;
  const Vec3 delta = apply_push(state, schedule, rng);
  REQUIRE(delta.norm() > 0.0);
  REQUIRE(std::abs(delta.x()) <= 0.2);
  REQUIRE(std::abs(delta.y()) <= 0.2);
  REQUIRE(delta.z() == 0.0);
  REQUIRE(state.push_velocity == delta);
  REQUIRE(schedule.next_time >= fired_at + 3.0);
  REQUIRE(schedule.next_time <= fired_at + 6.0);

  // The sim adds the push to the root velocity and decays it exponentially.
  const RobotModel model = make_single_joint();
  Simulator sim(model, uniform_dynamics(1, 0.05, 0.5, 0.0), SimConfig{}, identity_params(), 12);
  sim.state().push_velocity = Vec3(0.2, 0.0, 0.0);
  sim.step(VecX::Zero(1), Vec3::Zero(), Vec3::Zero());
  REQUIRE(sim.state().root_lin_vel.x() == Catch::Approx(0.2));
  REQUIRE(sim.state().push_velocity.x() ==
          Catch::Approx(0.2 * std::exp(-sim.config().dt / sim.config().push_decay_tau)));
}

TEST_CASE("termination conditions in priority order") {
  const std::vector<Vec3> body{Vec3::Zero(), Vec3::Zero()};
  std::vector<Vec3> ref{Vec3(0.4, 0.0, 0.0), Vec3(0.8, 0.0, 0.0)};  // mean err 0.6

  // Clip exhaustion wins even with failing errors.
  REQUIRE(check_termination(Vec3::Zero(), Vec3(9.0, 0.0, 0.0), body, ref, true, 2.5, 1.0) ==
          Termination::kClipEnd);
  // Root drift beyond the distance threshold.
  REQUIRE(check_termination(Vec3::Zero(), Vec3(2.6, 0.0, 0.0), body, body, false, 2.5, 1.0) ==
          Termination::kRootDistance);
  // Mean body error 0.6 against scale * 0.5.
  REQUIRE(check_termination(Vec3::Zero(), Vec3::Zero(), body, ref, false, 2.5, 1.0) ==
          Termination::kBodyError);
  REQUIRE(check_termination(Vec3::Zero(), Vec3::Zero(), body, ref, false, 2.5, 1.3) ==
          Termination::kContinue);
  REQUIRE(std::string(termination_name(Termination::kBodyError)) == "body_error");
  REQUIRE_THROWS_AS(check_termination(Vec3::Zero(), Vec3::Zero(), body, ref, false, 0.0, 1.0),
                    Error);
}

TEST_CASE("validation rejects broken dynamics and configs") {
  const RobotModel model = make_single_joint();
  JointDynamics dyn = uniform_dynamics(1, 0.0, 0.1, 0.0);  // zero inertia
  REQUIRE_THROWS_AS(validate_dynamics(dyn, model), Error);
  dyn = uniform_dynamics(2, 0.1, 0.1, 0.0);  // wrong length
  REQUIRE_THROWS_AS(validate_dynamics(dyn, model), Error);

  SimConfig config;
  config.dt = 0.0;
  REQUIRE_THROWS_AS(validate_sim_config(config), Error);

  DomainRandConfig dr;
  dr.push_interval = Range{0.0, 6.0};
  REQUIRE_THROWS_AS(validate_dr_config(dr), Error);
  dr = DomainRandConfig{};
  dr.friction_scale = Range{1.5, 0.8};
  REQUIRE_THROWS_AS(validate_dr_config(dr), Error);
}

TEST_CASE("domain randomization JSON round trip") {
  DomainRandConfig config;
  config.friction_scale = Range{0.7, 1.2};
  config.control_delay = Range{1.0, 3.0};
  const nlohmann::json doc = dr_config_to_json(config);
  const DomainRandConfig back = parse_dr_json(doc);
  REQUIRE(back.friction_scale.lo == 0.7);
  REQUIRE(back.friction_scale.hi == 1.2);
  REQUIRE(back.control_delay.hi == 3.0);
  REQUIRE(back.base_com.lo == -0.08);

  REQUIRE_THROWS_AS(parse_dr_json(nlohmann::json{{"friction_scale", {1.5}}}), Error);
  REQUIRE_THROWS_AS(parse_dr_json(nlohmann::json{{"push_interval", {-1.0, 2.0}}}), Error);
}

}  // namespace
}  // namespace clot
