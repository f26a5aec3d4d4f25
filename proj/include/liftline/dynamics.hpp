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

#include <cmath>

#include "liftline/errors.hpp"
#include "liftline/geometry.hpp"

namespace liftline {

struct PhysicalParams {
  double vehicle_mass = 5.0;   // m_Q [kg]
  double payload_mass = 2.0;   // m_L [kg]
  double gravity = 9.81;       // [m/s^2]
  Mat3 inertia = (Eigen::Vector3d(0.05, 0.05, 0.06)).asDiagonal();  // J [kg m^2]

  void validate() const {
    if (!(vehicle_mass > 0.0) || !(payload_mass > 0.0) || !(gravity > 0.0)) {
      throw InvalidInput("PhysicalParams: masses and gravity must be positive");
    }
    if ((inertia - inertia.transpose()).norm() > 1e-12) {
      throw InvalidInput("PhysicalParams: inertia must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw InvalidInput("PhysicalParams: inertia must be positive definite");
    }
  }
};

/// Full plant state. The cable direction q points from the vehicle attachment
/// toward the payload (x_Q = x_L - L q, payload below <=> q = -e3); the cable
/// angular velocity stays orthogonal to q.
struct SystemState {
  Vec3 payload_pos = Vec3::Zero();      // x_L [m]
  Vec3 payload_vel = Vec3::Zero();      // v_L [m/s]
  Vec3 cable_dir = -e3();               // q, unit
  Vec3 cable_omega = Vec3::Zero();      // omega [rad/s], q . omega = 0
  double cable_len = 1.0;               // L [m]
  double cable_len_rate = 0.0;          // Ldot [m/s]
  Mat3 attitude = Mat3::Identity();     // R, body -> inertial
  Vec3 body_rate = Vec3::Zero();        // Omega [rad/s], body frame

  void validate() const {
    require_unit(cable_dir, "SystemState.cable_dir");
    require_rotation(attitude, "SystemState.attitude");
    if (std::abs(cable_dir.dot(cable_omega)) > 1e-8) {
      throw InvalidInput("SystemState: cable_omega not orthogonal to cable_dir");
    }
    if (!(cable_len > 0.0)) throw InvalidInput("SystemState: cable_len must be positive");
  }
};

struct ControlInput {
  double thrust = 0.0;        // f [N], along R e3
  Vec3 torque = Vec3::Zero(); // tau [N m], body frame
  double winch_force = 0.0;   // f_L [N], applied along q
};

struct StateDerivative {
  Vec3 payload_pos_dot;
  Vec3 payload_vel_dot;
  Vec3 cable_dir_dot;
  Vec3 cable_omega_dot;
  double cable_len_dot;
  double cable_len_ddot;
  Mat3 attitude_dot;
  Vec3 body_rate_dot;
};

inline constexpr double kMinCableLen = 1e-3;  // [m]

/// Continuous-time equations of motion. `payload_accel_ext` is an additional
/// inertial acceleration on the payload (wind, impulse forces / m_L).
inline StateDerivative rhs(const SystemState& s, const ControlInput& u,
                           const PhysicalParams& p,
                           const Vec3& payload_accel_ext = Vec3::Zero(),
                           double min_cable_len = kMinCableLen) {
  if (s.cable_len <= min_cable_len) {
    throw CableDegenerate("rhs: cable length " + std::to_string(s.cable_len) +
                          " below minimum " + std::to_string(min_cable_len));
  }
  const double m_q = p.vehicle_mass;
  const double m_l = p.payload_mass;
  const Vec3 thrust_vec = u.thrust * (s.attitude * e3());
  const Vec3 q = s.cable_dir;
  const Vec3 q_dot = s.cable_omega.cross(q);

  StateDerivative d;
  d.payload_pos_dot = s.payload_vel;
  d.payload_vel_dot =
      (u.winch_force * q - m_l * p.gravity * e3()) / m_l + payload_accel_ext;
  d.cable_dir_dot = q_dot;
  d.cable_len_dot = s.cable_len_rate;
  d.cable_len_ddot = ((m_q + m_l) / m_l * u.winch_force - q.dot(thrust_vec) +
                      m_q * s.cable_len * q_dot.squaredNorm()) /
                     m_q;
  d.cable_omega_dot = (-q.cross(thrust_vec) - 2.0 * m_q * s.cable_len_rate * s.cable_omega) /
                      (m_q * s.cable_len);
  d.attitude_dot = s.attitude * hat(s.body_rate);
  d.body_rate_dot = p.inertia.ldlt().solve(u.torque - s.body_rate.cross(p.inertia * s.body_rate));
  return d;
}

namespace detail {

inline SystemState axpy(const SystemState& s, double a, const StateDerivative& d) {
  SystemState r = s;
  r.payload_pos += a * d.payload_pos_dot;
  r.payload_vel += a * d.payload_vel_dot;
  r.cable_dir += a * d.cable_dir_dot;
  r.cable_omega += a * d.cable_omega_dot;
  r.cable_len += a * d.cable_len_dot;
  r.cable_len_rate += a * d.cable_len_ddot;
  r.attitude += a * d.attitude_dot;
  r.body_rate += a * d.body_rate_dot;
  return r;
}

inline StateDerivative combine(const StateDerivative& k1, const StateDerivative& k2,
                               const StateDerivative& k3, const StateDerivative& k4) {
  StateDerivative d;
  d.payload_pos_dot =
      (k1.payload_pos_dot + 2.0 * k2.payload_pos_dot + 2.0 * k3.payload_pos_dot + k4.payload_pos_dot) / 6.0;
  d.payload_vel_dot =
      (k1.payload_vel_dot + 2.0 * k2.payload_vel_dot + 2.0 * k3.payload_vel_dot + k4.payload_vel_dot) / 6.0;
  d.cable_dir_dot =
      (k1.cable_dir_dot + 2.0 * k2.cable_dir_dot + 2.0 * k3.cable_dir_dot + k4.cable_dir_dot) / 6.0;
  d.cable_omega_dot =
      (k1.cable_omega_dot + 2.0 * k2.cable_omega_dot + 2.0 * k3.cable_omega_dot + k4.cable_omega_dot) / 6.0;
  d.cable_len_dot =
      (k1.cable_len_dot + 2.0 * k2.cable_len_dot + 2.0 * k3.cable_len_dot + k4.cable_len_dot) / 6.0;
  d.cable_len_ddot =
      (k1.cable_len_ddot + 2.0 * k2.cable_len_ddot + 2.0 * k3.cable_len_ddot + k4.cable_len_ddot) / 6.0;
  d.attitude_dot =
      (k1.attitude_dot + 2.0 * k2.attitude_dot + 2.0 * k3.attitude_dot + k4.attitude_dot) / 6.0;
  d.body_rate_dot =
      (k1.body_rate_dot + 2.0 * k2.body_rate_dot + 2.0 * k3.body_rate_dot + k4.body_rate_dot) / 6.0;
  return d;
}

/// Re-project onto the state manifold: q renormalized, R polar-projected,
/// omega re-orthogonalized against the new q. Exact states pass untouched so
/// that equilibria stay bitwise fixed points.
inline void reproject(SystemState& s) {
  const double qn = s.cable_dir.norm();
  if (std::abs(qn - 1.0) > 1e-15) s.cable_dir /= qn;
  if ((s.attitude.transpose() * s.attitude - Mat3::Identity()).norm() > 1e-14) {
    s.attitude = project_rotation(s.attitude);
  }
  const double along = s.cable_dir.dot(s.cable_omega);
  if (std::abs(along) > 0.0) s.cable_omega -= along * s.cable_dir;
}

}  // namespace detail

/// Classical RK4 step with zero-order-held input, followed by manifold
/// re-projection. dt must lie in (0, 0.01].
inline SystemState step(const SystemState& s, const ControlInput& u,
                        const PhysicalParams& p, double dt,
                        const Vec3& payload_accel_ext = Vec3::Zero()) {
  if (!(dt > 0.0) || dt > 0.01) throw InvalidInput("step: dt must be in (0, 0.01]");
  const StateDerivative k1 = rhs(s, u, p, payload_accel_ext);
  const StateDerivative k2 = rhs(detail::axpy(s, 0.5 * dt, k1), u, p, payload_accel_ext);
  const StateDerivative k3 = rhs(detail::axpy(s, 0.5 * dt, k2), u, p, payload_accel_ext);
  const StateDerivative k4 = rhs(detail::axpy(s, dt, k3), u, p, payload_accel_ext);
  SystemState next = detail::axpy(s, dt, detail::combine(k1, k2, k3, k4));
  detail::reproject(next);
  return next;
}

/// Vehicle position and velocity recovered from the payload-centric state:
/// x_Q = x_L - L q and v_Q = v_L - Ldot q - L (omega x q).
struct VehicleKinematics {
  Vec3 pos;
  Vec3 vel;
};

inline VehicleKinematics quad_from_payload(const SystemState& s) {
  VehicleKinematics k;
  k.pos = s.payload_pos - s.cable_len * s.cable_dir;
  k.vel = s.payload_vel - s.cable_len_rate * s.cable_dir -
          s.cable_len * s.cable_omega.cross(s.cable_dir);
  return k;
}

/// Input for the reduced (ideal attitude) model: the realized thrust vector
/// equals the commanded virtual force.
struct ReducedInput {
  Vec3 force = Vec3::Zero();   // F_c [N], world frame
  double winch_force = 0.0;    // f_L [N]
};

inline StateDerivative rhs_reduced(const SystemState& s, const ReducedInput& u,
                                   const PhysicalParams& p,
                                   const Vec3& payload_accel_ext = Vec3::Zero(),
                                   double min_cable_len = kMinCableLen) {
  if (s.cable_len <= min_cable_len) {
    throw CableDegenerate("rhs_reduced: cable length below minimum");
  }
  const double m_q = p.vehicle_mass;
  const double m_l = p.payload_mass;
  const Vec3 q = s.cable_dir;
  const Vec3 q_dot = s.cable_omega.cross(q);

  StateDerivative d;
  d.payload_pos_dot = s.payload_vel;
  d.payload_vel_dot =
      (u.winch_force * q - m_l * p.gravity * e3()) / m_l + payload_accel_ext;
  d.cable_dir_dot = q_dot;
  d.cable_len_dot = s.cable_len_rate;
  d.cable_len_ddot = ((m_q + m_l) / m_l * u.winch_force - q.dot(u.force) +
                      m_q * s.cable_len * q_dot.squaredNorm()) /
                     m_q;
  d.cable_omega_dot =
      (-q.cross(u.force) - 2.0 * m_q * s.cable_len_rate * s.cable_omega) / (m_q * s.cable_len);
  d.attitude_dot = Mat3::Zero();
  d.body_rate_dot = Vec3::Zero();
  return d;
}

inline SystemState step_reduced(const SystemState& s, const ReducedInput& u,
                                const PhysicalParams& p, double dt,
                                const Vec3& payload_accel_ext = Vec3::Zero()) {
  if (!(dt > 0.0) || dt > 0.01) throw InvalidInput("step_reduced: dt must be in (0, 0.01]");
  const StateDerivative k1 = rhs_reduced(s, u, p, payload_accel_ext);
  const StateDerivative k2 = rhs_reduced(detail::axpy(s, 0.5 * dt, k1), u, p, payload_accel_ext);
  const StateDerivative k3 = rhs_reduced(detail::axpy(s, 0.5 * dt, k2), u, p, payload_accel_ext);
  const StateDerivative k4 = rhs_reduced(detail::axpy(s, dt, k3), u, p, payload_accel_ext);
  SystemState next = detail::axpy(s, dt, detail::combine(k1, k2, k3, k4));
  detail::reproject(next);
  return next;
}

}  // namespace liftline
