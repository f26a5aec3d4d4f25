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

#pragma once

// Test-only oracle: simulates the vehicle and payload as two point masses in
// Cartesian coordinates (plus the rigid-body attitude) and recovers the
// cable quantities from the relative position. Shares no dynamics code with
// the library; only Newton's equations for each mass.

#include "liftline/dynamics.hpp"
#include "liftline/geometry.hpp"

namespace oracle {

using liftline::ControlInput;
using liftline::Mat3;
using liftline::PhysicalParams;
using liftline::SystemState;
using liftline::Vec3;

struct CartesianState {
  Vec3 x_L, v_L, x_Q, v_Q;
  Mat3 R;
  Vec3 Omega;
};

struct CartesianDeriv {
  Vec3 v_L, a_L, v_Q, a_Q;
  Mat3 R_dot;
  Vec3 Omega_dot;
};

inline CartesianDeriv derivs(const CartesianState& s, const ControlInput& u,
                             const PhysicalParams& p) {
  const Vec3 rel = s.x_L - s.x_Q;
  const Vec3 q = rel / rel.norm();
  const Vec3 e3(0, 0, 1);
  CartesianDeriv d;
  d.v_L = s.v_L;
  d.a_L = (u.winch_force * q - p.payload_mass * p.gravity * e3) / p.payload_mass;
  d.v_Q = s.v_Q;
  d.a_Q = (u.thrust * (s.R * e3) - u.winch_force * q - p.vehicle_mass * p.gravity * e3) /
          p.vehicle_mass;
  d.R_dot = s.R * liftline::hat(s.Omega);
  d.Omega_dot = p.inertia.ldlt().solve(u.torque - s.Omega.cross(p.inertia * s.Omega));
  return d;
}

/// Cable-coordinate accelerations recovered from the Cartesian equations via
/// the kinematic identities L = |x_L - x_Q|, q = (x_L - x_Q)/L, omega = q x qdot.
struct CableAccel {
  Vec3 payload_acc;
  double len_ddot;
  Vec3 omega_dot;
};

inline CableAccel cable_accelerations(const SystemState& s, const ControlInput& u,
                                      const PhysicalParams& p) {
  CartesianState c;
  c.x_L = s.payload_pos;
  c.v_L = s.payload_vel;
  const auto veh = liftline::quad_from_payload(s);
  c.x_Q = veh.pos;
  c.v_Q = veh.vel;
  c.R = s.attitude;
  c.Omega = s.body_rate;
  const CartesianDeriv d = derivs(c, u, p);

  const Vec3 rel = c.x_L - c.x_Q;
  const double len = rel.norm();
  const Vec3 q = rel / len;
  const Vec3 rel_dot = c.v_L - c.v_Q;
  const double len_dot = q.dot(rel_dot);
  const Vec3 q_dot = (rel_dot - len_dot * q) / len;
  const Vec3 rel_ddot = d.a_L - d.a_Q;

  CableAccel out;
  out.payload_acc = d.a_L;
  out.len_ddot = q_dot.dot(rel_dot) + q.dot(rel_ddot);
  const Vec3 q_ddot = (rel_ddot - out.len_ddot * q - 2.0 * len_dot * q_dot) / len;
  out.omega_dot = q.cross(q_ddot);
  return out;
}

inline CartesianState from_system(const SystemState& s) {
  CartesianState c;
  c.x_L = s.payload_pos;
  c.v_L = s.payload_vel;
  const auto veh = liftline::quad_from_payload(s);
  c.x_Q = veh.pos;
  c.v_Q = veh.vel;
  c.R = s.attitude;
  c.Omega = s.body_rate;
  return c;
}

inline CartesianState axpy(const CartesianState& s, double a, const CartesianDeriv& d) {
  CartesianState r = s;
  r.x_L += a * d.v_L;
  r.v_L += a * d.a_L;
  r.x_Q += a * d.v_Q;
  r.v_Q += a * d.a_Q;
  r.R += a * d.R_dot;
  r.Omega += a * d.Omega_dot;
  return r;
}

inline CartesianState rk4(const CartesianState& s, const ControlInput& u,
                          const PhysicalParams& p, double dt) {
  const CartesianDeriv k1 = derivs(s, u, p);
  const CartesianDeriv k2 = derivs(axpy(s, 0.5 * dt, k1), u, p);
  const CartesianDeriv k3 = derivs(axpy(s, 0.5 * dt, k2), u, p);
  const CartesianDeriv k4 = derivs(axpy(s, dt, k3), u, p);
  CartesianState r = s;
  auto blend = [&](auto f1, auto f2, auto f3, auto f4) {
    return (f1 + 2.0 * f2 + 2.0 * f3 + f4) / 6.0;
  };
  r.x_L += dt * blend(k1.v_L, k2.v_L, k3.v_L, k4.v_L);
  r.v_L += dt * blend(k1.a_L, k2.a_L, k3.a_L, k4.a_L);
  r.x_Q += dt * blend(k1.v_Q, k2.v_Q, k3.v_Q, k4.v_Q);
  r.v_Q += dt * blend(k1.a_Q, k2.a_Q, k3.a_Q, k4.a_Q);
  r.R += dt * blend(k1.R_dot, k2.R_dot, k3.R_dot, k4.R_dot);
  r.Omega += dt * blend(k1.Omega_dot, k2.Omega_dot, k3.Omega_dot, k4.Omega_dot);
  r.R = liftline::project_rotation(r.R);
  return r;
}

}  // namespace oracle
