// Copyright 2026 The Liftline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "liftline/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "liftline/rng.hpp"
#include "oracle_newton_euler.hpp"

using namespace liftline;

namespace {

SystemState hover_state() {
  SystemState s;
  s.payload_pos = Vec3(0, 0, 2);
  s.cable_dir = Vec3(0, 0, -1);
  s.cable_len = 1.8;
  return s;
}

ControlInput hover_input(const PhysicalParams& p) {
  ControlInput u;
  u.thrust = (p.vehicle_mass + p.payload_mass) * p.gravity;
  u.winch_force = -p.payload_mass * p.gravity;
  return u;
}

SystemState random_state(CounterRng& rng) {
  SystemState s;
  s.payload_pos = 5.0 * rng.gaussian3();
  s.payload_vel = 2.0 * rng.gaussian3();
  s.cable_dir = rng.unit_vector();
  Vec3 w = rng.gaussian3();
  w -= s.cable_dir.dot(w) * s.cable_dir;
  s.cable_omega = w;
  s.cable_len = 0.5 + 2.5 * rng.uniform();
  s.cable_len_rate = rng.gaussian();
  s.attitude = axis_angle(rng.unit_vector(), 2.0 * M_PI * rng.uniform());
  s.body_rate = rng.gaussian3();
  return s;
}

ControlInput random_input(CounterRng& rng) {
  ControlInput u;
  u.thrust = 80.0 * rng.uniform();
  u.torque = 0.5 * rng.gaussian3();
  u.winch_force = -40.0 + 50.0 * rng.uniform();
  return u;
}

}  // namespace

TEST(Rhs, HoverEquilibrium) {
  const PhysicalParams p;
  const SystemState s = hover_state();
  const ControlInput u = hover_input(p);
  EXPECT_NEAR(u.thrust, 68.67, 1e-12);
  EXPECT_NEAR(u.winch_force, -19.62, 1e-12);
  const StateDerivative d = rhs(s, u, p);
  EXPECT_EQ(d.payload_pos_dot, s.payload_vel);
  EXPECT_LT(d.payload_vel_dot.norm(), 1e-14);
  EXPECT_LT(d.cable_dir_dot.norm(), 1e-14);
  EXPECT_LT(d.cable_omega_dot.norm(), 1e-14);
  EXPECT_EQ(d.cable_len_dot, 0.0);
  EXPECT_NEAR(d.cable_len_ddot, 0.0, 1e-13);
  EXPECT_LT(d.attitude_dot.norm(), 1e-14);
  EXPECT_LT(d.body_rate_dot.norm(), 1e-14);
}

TEST(Rhs, FreeFall) {
  const PhysicalParams p;
  SystemState s = hover_state();
  const ControlInput u;  // all zero
  const StateDerivative d = rhs(s, u, p);
  EXPECT_LT((d.payload_vel_dot - Vec3(0, 0, -9.81)).norm(), 1e-14);
  EXPECT_NEAR(d.cable_len_ddot, 0.0, 1e-14);
  EXPECT_LT(d.cable_omega_dot.norm(), 1e-14);
}

TEST(Rhs, RejectsDegenerateCable) {
  const PhysicalParams p;
  SystemState s = hover_state();
  s.cable_len = 5e-4;
  EXPECT_THROW(rhs(s, ControlInput{}, p), CableDegenerate);
}

// Acceleration-level agreement with the two-point-mass Newton oracle.
TEST(Rhs, MatchesNewtonOracle) {
  const PhysicalParams p;
  CounterRng rng(101);
  for (int i = 0; i < 1000; ++i) {
    const SystemState s = random_state(rng);
    const ControlInput u = random_input(rng);
    const StateDerivative d = rhs(s, u, p);
    const oracle::CableAccel ref = oracle::cable_accelerations(s, u, p);
    const double tol = 1e-8;
    EXPECT_LT((d.payload_vel_dot - ref.payload_acc).norm(),
              tol * (1.0 + ref.payload_acc.norm()));
    EXPECT_LT(std::abs(d.cable_len_ddot - ref.len_ddot),
              tol * (1.0 + std::abs(ref.len_ddot)));
    EXPECT_LT((d.cable_omega_dot - ref.omega_dot).norm(),
              tol * (1.0 + ref.omega_dot.norm()));
  }
}

TEST(Step, HoverIsFixedPoint) {
  const PhysicalParams p;
  SystemState s = hover_state();
  const ControlInput u = hover_input(p);
  for (int i = 0; i < 1000; ++i) {
    const SystemState n = step(s, u, p, 1e-3);
    EXPECT_LT((n.payload_pos - s.payload_pos).norm(), 1e-12);
    EXPECT_LT((n.payload_vel - s.payload_vel).norm(), 1e-12);
    EXPECT_LT(std::abs(n.cable_len - s.cable_len), 1e-12);
    EXPECT_LT((n.attitude - s.attitude).norm(), 1e-12);
    s = n;
  }
}

TEST(Step, FreeFallVelocity) {
  const PhysicalParams p;
  SystemState s = hover_state();
  s.payload_pos = Vec3(0, 0, 100);
  ControlInput u;
  for (int i = 0; i < 1000; ++i) s = step(s, u, p, 1e-3);
  EXPECT_NEAR(s.payload_vel.z(), -9.81, 1e-9);
}

TEST(Step, RejectsBadDt) {
  const PhysicalParams p;
  const SystemState s = hover_state();
  EXPECT_THROW(step(s, ControlInput{}, p, 0.0), InvalidInput);
  EXPECT_THROW(step(s, ControlInput{}, p, 0.02), InvalidInput);
}

// Trajectory-level agreement between the cable-coordinate integration and
// the Cartesian oracle under smooth open-loop inputs.
TEST(Step, TrajectoryMatchesOracleOverFiveSeconds) {
  const PhysicalParams p;
  SystemState s = hover_state();
  s.cable_omega = Vec3(0.1, -0.05, 0);
  s.cable_omega -= s.cable_dir.dot(s.cable_omega) * s.cable_dir;
  oracle::CartesianState c = oracle::from_system(s);

  const double dt = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double t = i * dt;
    ControlInput u;
    u.thrust = 68.67 + 2.0 * std::sin(t);
    u.torque = Vec3(0.01 * std::sin(2.0 * t), 0.008 * std::cos(3.0 * t), -0.005 * std::sin(t));
    u.winch_force = -19.62 + 0.5 * std::sin(1.3 * t);
    s = step(s, u, p, dt);
    c = oracle::rk4(c, u, p, dt);

    const auto veh = quad_from_payload(s);
    worst = std::max(worst, (s.payload_pos - c.x_L).norm());
    worst = std::max(worst, (s.payload_vel - c.v_L).norm());
    worst = std::max(worst, (veh.pos - c.x_Q).norm());
    const double len_oracle = (c.x_L - c.x_Q).norm();
    worst = std::max(worst, std::abs(s.cable_len - len_oracle));
  }
  EXPECT_LT(worst, 1e-6);
}

// d/dt (m_Q L^2 omega) must equal the moment of the applied forces about the
// payload, transported to the accelerating payload frame.
TEST(Step, AngularMomentumConsistency) {
  const PhysicalParams p;
  SystemState s = hover_state();
  s.cable_omega = Vec3(0.2, 0.1, 0);
  s.cable_omega -= s.cable_dir.dot(s.cable_omega) * s.cable_dir;

  auto momentum = [&](const SystemState& st) {
    return p.vehicle_mass * st.cable_len * st.cable_len * st.cable_omega;
  };

  // Centered difference within one input-hold segment so the derivative is
  // smooth across the stencil.
  const double dt = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double t = i * dt;
    ControlInput u;
    u.thrust = 68.67 + 1.5 * std::sin(0.7 * t);
    u.winch_force = -19.62 + 0.3 * std::cos(t);
    const SystemState mid = step(s, u, p, 0.5 * dt);
    const SystemState end = step(mid, u, p, 0.5 * dt);

    const Vec3 h_dot_fd = (momentum(end) - momentum(s)) / dt;
    const Vec3 thrust_vec = u.thrust * (mid.attitude * e3());
    const Vec3 r = -mid.cable_len * mid.cable_dir;
    const Vec3 a_payload = (u.winch_force * mid.cable_dir -
                            p.payload_mass * p.gravity * e3()) /
                           p.payload_mass;
    const Vec3 torque_about_payload =
        r.cross(thrust_vec - u.winch_force * mid.cable_dir -
                p.vehicle_mass * p.gravity * e3());
    const Vec3 h_dot = torque_about_payload - r.cross(p.vehicle_mass * a_payload);
    worst = std::max(worst, (h_dot_fd - h_dot).norm());
    s = end;
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Step, ManifoldInvariantsHoldOverLongRun) {
  const PhysicalParams p;
  SystemState s = hover_state();
  s.cable_omega = Vec3(0.3, 0.2, 0);
  s.cable_omega -= s.cable_dir.dot(s.cable_omega) * s.cable_dir;
  s.body_rate = Vec3(0.1, -0.2, 0.05);

  const double dt = 1e-3;
  for (int i = 0; i < 5000; ++i) {
    const double t = i * dt;
    ControlInput u;
    u.thrust = 68.67 + std::sin(t);
    u.torque = 0.02 * Vec3(std::sin(t), std::cos(2 * t), std::sin(3 * t));
    u.winch_force = -19.62;
    s = step(s, u, p, dt);
    EXPECT_LT(std::abs(s.cable_dir.norm() - 1.0), 1e-9);
    EXPECT_LT((s.attitude.transpose() * s.attitude - Mat3::Identity()).norm(), 1e-8);
    EXPECT_LT(std::abs(s.cable_dir.dot(s.cable_omega)), 1e-8);
  }
}

TEST(QuadFromPayload, VerticalCable) {
  SystemState s;
  s.payload_pos = Vec3(0, 0, 2);
  s.cable_dir = Vec3(0, 0, -1);
  s.cable_len = 1.85;
  const auto v = quad_from_payload(s);
  EXPECT_LT((v.pos - Vec3(0, 0, 3.85)).norm(), 1e-15);
}

TEST(QuadFromPayload, PureReelOut) {
  SystemState s;
  s.payload_pos = Vec3(0, 0, 2);
  s.payload_vel = Vec3::Zero();
  s.cable_dir = Vec3(0, 0, -1);
  s.cable_len = 1.85;
  s.cable_len_rate = 0.3;
  const auto v = quad_from_payload(s);
  EXPECT_LT((v.vel - Vec3(0, 0, 0.3)).norm(), 1e-15);
}

// Finite-difference check that d/dt(x_L - L q) equals the reported vehicle
// velocity along an integrated trajectory.
TEST(QuadFromPayload, VelocityConsistentWithPositionDerivative) {
  const PhysicalParams p;
  SystemState s = hover_state();
  s.cable_omega = Vec3(0.15, -0.1, 0);
  s.cable_omega -= s.cable_dir.dot(s.cable_omega) * s.cable_dir;
  const double dt = 1e-3;
  SystemState prev = s;
  ControlInput u = hover_input(p);
  u.winch_force -= 0.4;  // reel while swinging
  s = step(s, u, p, dt);
  for (int i = 0; i < 2000; ++i) {
    const SystemState next = step(s, u, p, dt);
    const Vec3 v_fd = (quad_from_payload(next).pos - quad_from_payload(prev).pos) / (2.0 * dt);
    const Vec3 v = quad_from_payload(s).vel;
    EXPECT_LT((v_fd - v).norm(), 1e-6 * (1.0 + v.norm()) + 1e-6);
    prev = s;
    s = next;
  }
}

TEST(ReducedStep, MatchesFullStepWhenThrustVectorIdentical) {
  const PhysicalParams p;
  CounterRng rng(301);
  for (int i = 0; i < 200; ++i) {
    SystemState s = random_state(rng);
    // Full model with attitude R and thrust f realizes the force f R e3.
    ControlInput u = random_input(rng);
    ReducedInput ru;
    ru.force = u.thrust * (s.attitude * e3());
    ru.winch_force = u.winch_force;
    const StateDerivative a = rhs(s, u, p);
    const StateDerivative b = rhs_reduced(s, ru, p);
    EXPECT_LT((a.payload_vel_dot - b.payload_vel_dot).norm(), 1e-12);
    EXPECT_LT(std::abs(a.cable_len_ddot - b.cable_len_ddot), 1e-10);
    EXPECT_LT((a.cable_omega_dot - b.cable_omega_dot).norm(), 1e-11);
  }
}
