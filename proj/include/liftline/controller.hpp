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

#include <algorithm>
#include <cmath>

#include "liftline/dynamics.hpp"
#include "liftline/errors.hpp"
#include "liftline/geometry.hpp"
#include "liftline/reference.hpp"

namespace liftline {

struct Gains {
  // Payload position loop (diagonal gains, bounded tanh feedback).
  Vec3 kp_pos = Vec3(4.0, 4.0, 5.0);
  Vec3 kd_pos = Vec3(4.5, 4.5, 6.0);
  // Cable length loop with log barrier of half-width len_err_max.
  double kp_len = 4.0;
  double kd_len = 4.5;
  double ka_len = 0.5;
  double len_err_max = 0.25;  // [m]
  // Cable direction loop; barrier bound on 1 - q.q_d (must stay < 1).
  double kq_dir = 1.8;
  double kw_dir = 1.9;
  double kb_dir = 0.5;
  double dir_err_max_sq = 0.1;
  // Attitude loop, effective gains (time-scale factors already folded in).
  double kR = 1.92;
  double kOm = 0.3;
  // Degeneracy guards.
  double min_force = 1e-6;       // [N]
  double min_axis_cross = 1e-3;  // heading-axis fallback threshold
  Vec3 heading_axis = Vec3(1.0, 0.0, 0.0);
  // Desired-body-rate derivative estimator (backward difference, low-pass,
  // saturation).
  double ref_rate_filter_tau = 0.03;  // [s]
  double ref_accel_sat = 50.0;        // [rad/s^2]

  void validate() const {
    auto pos = [](double v) { return v > 0.0; };
    if (!(kp_pos.array() > 0.0).all() || !(kd_pos.array() > 0.0).all() ||
        !pos(kp_len) || !pos(kd_len) || !pos(ka_len) || !pos(kq_dir) ||
        !pos(kw_dir) || !pos(kb_dir) || !pos(len_err_max) || !pos(kR) || !pos(kOm)) {
      throw InvalidInput("Gains: all gains must be positive");
    }
    if (!(dir_err_max_sq > 0.0 && dir_err_max_sq < 1.0)) {
      throw InvalidInput("Gains: dir_err_max_sq must lie in (0, 1)");
    }
  }
};

/// Everything the controller computes in one pass: virtual forces, setpoint
/// chains, inputs, errors and barrier diagnostics. Doubles as the per-step
/// log record.
struct CommandState {
  // Payload-layer virtual force and its modeled time derivatives.
  Vec3 F_L = Vec3::Zero();
  Vec3 FL_dot = Vec3::Zero();
  Vec3 FL_ddot = Vec3::Zero();
  // Desired cable direction chain.
  Vec3 q_d = -e3();
  Vec3 qd_dot = Vec3::Zero();
  Vec3 qd_ddot = Vec3::Zero();
  Vec3 omega_d = Vec3::Zero();
  Vec3 omega_d_dot = Vec3::Zero();
  double f_L = 0.0;
  // Cable-layer forces.
  double f_c = 0.0;
  Vec3 F_c_par = Vec3::Zero();
  Vec3 F_c_perp = Vec3::Zero();
  Vec3 F_c = Vec3::Zero();
  Vec3 Fc_dot = Vec3::Zero();
  // Attitude setpoints.
  Mat3 R_d = Mat3::Identity();
  Vec3 Omega_d = Vec3::Zero();
  Vec3 Omega_d_dot = Vec3::Zero();
  // Applied inputs.
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();
  // Errors as evaluated by the controller.
  Vec3 e_x = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  Vec3 e_q = Vec3::Zero();
  Vec3 e_omega = Vec3::Zero();
  Vec3 e_R = Vec3::Zero();
  Vec3 e_Omega = Vec3::Zero();
  double e_L = 0.0;
  double eL_dot = 0.0;
  double psi_q = 0.0;
  // Coupling diagnostics: delta_L = f_L q - F_L with |delta_L| <= |F_L||e_q|.
  Vec3 delta_L = Vec3::Zero();
  double delta_bound = 0.0;
  // Barrier margins (positive inside the admissible sets).
  double barrier_len_margin = 0.0;
  double barrier_dir_margin = 0.0;
};

struct PositionCommand {
  Vec3 F_L;
  Vec3 q_d;
  double f_L;
};

/// Payload position layer: bounded-feedback virtual force, desired cable
/// direction opposite the force, and the winch force as its projection on
/// the measured direction.
inline PositionCommand position_control(const Vec3& e_x, const Vec3& e_v, const Vec3& q,
                                        const PayloadRef& ref, const Gains& g,
                                        const PhysicalParams& p) {
  PositionCommand c;
  c.F_L = -g.kp_pos.cwiseProduct(tanh3(e_x)) - g.kd_pos.cwiseProduct(tanh3(e_v)) +
          p.payload_mass * ref.d[2] + p.payload_mass * p.gravity * e3();
  const double n = c.F_L.norm();
  if (n < g.min_force) {
    throw DegenerateForce("position_control: virtual force too small to define a direction");
  }
  c.q_d = -c.F_L / n;
  c.f_L = c.F_L.dot(q);
  return c;
}

struct CommandDerivatives {
  Vec3 FL_dot;
  Vec3 FL_ddot;
  Vec3 qd_dot;
  Vec3 qd_ddot;
  Vec3 omega_d;
  Vec3 omega_d_dot;
};

/// Time derivatives of the position-layer commands along the closed payload
/// loop. The payload acceleration is reconstructed exactly from the applied
/// winch force, (f_L q - m_L xdd_des - m_L g e3)/m_L with f_L = F_L . q, so
/// no state differentiation is needed; the desired-direction chain follows
/// from differentiating the normalized force twice.
inline CommandDerivatives command_derivatives(const Vec3& e_x, const Vec3& e_v,
                                              const Vec3& F_L, const Vec3& q,
                                              const Vec3& omega, const PayloadRef& ref,
                                              const Gains& g, const PhysicalParams& p) {
  const Vec3 th_x = tanh3(e_x);
  const Vec3 th_v = tanh3(e_v);
  const Vec3 s2_x = sech3(e_x).cwiseAbs2();
  const Vec3 s2_v = sech3(e_v).cwiseAbs2();
  const double m_l = p.payload_mass;
  const Vec3 q_dot = omega.cross(q);
  const double f_l = F_L.dot(q);

  const Vec3 ev_dot = (f_l * q - m_l * ref.d[2] - m_l * p.gravity * e3()) / m_l;

  CommandDerivatives d;
  d.FL_dot = -g.kp_pos.cwiseProduct(s2_x.cwiseProduct(e_v)) -
             g.kd_pos.cwiseProduct(s2_v.cwiseProduct(ev_dot)) + p.payload_mass * ref.d[3];

  const double fl_dot = d.FL_dot.dot(q) + F_L.dot(q_dot);
  const Vec3 ev_ddot = (fl_dot * q + f_l * q_dot) / m_l - ref.d[3];
  // d/dt sech^2(a) = -2 sech^2(a) tanh(a) adot, componentwise.
  const Vec3 ds2_x = -2.0 * s2_x.cwiseProduct(th_x).cwiseProduct(e_v);
  const Vec3 ds2_v = -2.0 * s2_v.cwiseProduct(th_v).cwiseProduct(ev_dot);
  d.FL_ddot = -g.kp_pos.cwiseProduct(ds2_x.cwiseProduct(e_v) + s2_x.cwiseProduct(ev_dot)) -
              g.kd_pos.cwiseProduct(ds2_v.cwiseProduct(ev_dot) + s2_v.cwiseProduct(ev_ddot)) +
              p.payload_mass * ref.d[4];

  const double n = F_L.norm();
  if (n < g.min_force) {
    throw DegenerateForce("command_derivatives: virtual force too small");
  }
  const Vec3 uh = F_L / n;
  d.qd_dot = -(d.FL_dot - uh * uh.dot(d.FL_dot)) / n;

  const double n2 = n * n;
  const double ud = F_L.dot(d.FL_dot);
  d.qd_ddot = -(d.FL_ddot / n - 2.0 * d.FL_dot * ud / (n2 * n) -
                F_L * (d.FL_dot.squaredNorm() + F_L.dot(d.FL_ddot)) / (n2 * n) +
                3.0 * F_L * ud * ud / (n2 * n2 * n));

  d.omega_d = (-uh).cross(d.qd_dot);
  d.omega_d_dot = (-uh).cross(d.qd_ddot);
  return d;
}

/// Cable length layer. q_dot is the measured direction rate (omega x q);
/// len_acc_des is the desired-length second derivative feedforward.
inline double cable_length_control(double e_L, double eL_dot, double f_L, double cable_len,
                                   const Vec3& q_dot, double len_acc_des, const Gains& g,
                                   const PhysicalParams& p) {
  const double bound = g.len_err_max;
  if (std::abs(e_L) >= bound) {
    throw BarrierViolation("cable_length_control", std::abs(e_L), bound);
  }
  const double b2 = bound * bound - e_L * e_L;
  return -g.kp_len * e_L - g.kd_len * eL_dot -
         (p.vehicle_mass + p.payload_mass) / p.payload_mass * f_L -
         p.vehicle_mass * cable_len * q_dot.squaredNorm() +
         p.vehicle_mass * len_acc_des - g.ka_len * e_L / b2;
}

/// Cable direction layer. Returns the force component perpendicular to q;
/// the cross product with q makes the orthogonality exact.
inline Vec3 cable_direction_control(const Vec3& q, const Vec3& q_dot, const Vec3& omega,
                                    double cable_len, double cable_len_rate,
                                    const Vec3& e_q, const Vec3& e_omega, double psi_q,
                                    const Vec3& omega_d, const Vec3& omega_d_dot,
                                    const Gains& g, const PhysicalParams& p) {
  if (psi_q >= g.dir_err_max_sq) {
    throw BarrierViolation("cable_direction_control", psi_q, g.dir_err_max_sq);
  }
  const Vec3 b = -g.kq_dir * e_q - g.kw_dir * e_omega - q.dot(omega_d) * q_dot -
                 q.cross(q.cross(omega_d_dot)) + 2.0 * (cable_len_rate / cable_len) * omega -
                 g.kb_dir * e_q / (g.dir_err_max_sq - psi_q);
  return p.vehicle_mass * cable_len * q.cross(b);
}

struct ThrustCommand {
  Vec3 F_c;
  double thrust;
};

/// Sum the parallel and perpendicular force parts and project onto the
/// current body z-axis to get the scalar thrust.
inline ThrustCommand assemble_thrust(const Vec3& F_c_par, const Vec3& F_c_perp,
                                     const Mat3& R) {
  ThrustCommand t;
  t.F_c = F_c_par + F_c_perp;
  t.thrust = t.F_c.dot(R * e3());
  return t;
}

struct AttitudeSetpoint {
  Mat3 R_d;
  Vec3 Omega_d;
};

/// Desired attitude from the commanded force direction and a heading axis,
/// with the desired body rate from the analytic frame derivative.
inline AttitudeSetpoint attitude_setpoint(const Vec3& F_c, const Vec3& Fc_dot,
                                          const Gains& g) {
  const double n = F_c.norm();
  if (n < g.min_force) {
    throw DegenerateForce("attitude_setpoint: commanded force too small");
  }
  const Vec3 r3 = F_c / n;
  Vec3 r1a = g.heading_axis;
  if (r3.cross(r1a).norm() < g.min_axis_cross) {
    r1a = Vec3(0.0, 1.0, 0.0);
  }
  const Vec3 r3_dot = (Fc_dot - r3 * r3.dot(Fc_dot)) / n;
  const Vec3 w = r3.cross(r1a);
  const double wn = w.norm();
  const Vec3 r2 = w / wn;
  const Vec3 w_dot = r3_dot.cross(r1a);
  const Vec3 r2_dot = (w_dot - r2 * r2.dot(w_dot)) / wn;
  const Vec3 r1 = r2.cross(r3);
  const Vec3 r1_dot = r2_dot.cross(r3) + r2.cross(r3_dot);

  AttitudeSetpoint sp;
  sp.R_d.col(0) = r1;
  sp.R_d.col(1) = r2;
  sp.R_d.col(2) = r3;
  Mat3 rd_dot;
  rd_dot.col(0) = r1_dot;
  rd_dot.col(1) = r2_dot;
  rd_dot.col(2) = r3_dot;
  const Mat3 s = sp.R_d.transpose() * rd_dot;
  const Mat3 sk = 0.5 * (s - s.transpose());
  sp.Omega_d = Vec3(sk(2, 1), sk(0, 2), sk(1, 0));
  return sp;
}

/// Attitude torque: PD on (e_R, e_Omega) plus gyroscopic and tracking
/// feedforward terms.
inline Vec3 attitude_control(const Vec3& e_R, const Vec3& e_Omega, const Vec3& Omega,
                             const Mat3& R, const Mat3& R_d, const Vec3& Omega_d,
                             const Vec3& Omega_d_dot, const Gains& g,
                             const PhysicalParams& p) {
  const Mat3 rr = R.transpose() * R_d;
  return -g.kR * e_R - g.kOm * e_Omega + Omega.cross(p.inertia * Omega) -
         p.inertia * (hat(Omega) * rr * Omega_d - rr * Omega_d_dot);
}

namespace detail {

/// C1 extension of the length-barrier feedback beyond 90% of the admissible
/// set, for use inside prediction rollouts: keeps the embedded model finite
/// and smooth where the flight controller would abort.
inline double soft_len_barrier_term(double e_L, const Gains& g) {
  const double s0 = 0.9 * g.len_err_max;
  const double b2 = g.len_err_max * g.len_err_max;
  if (std::abs(e_L) <= s0) return g.ka_len * e_L / (b2 - e_L * e_L);
  const double d0 = b2 - s0 * s0;
  const double t0 = g.ka_len * s0 / d0;
  const double slope = g.ka_len * (b2 + s0 * s0) / (d0 * d0);
  return std::copysign(t0 + slope * (std::abs(e_L) - s0), e_L);
}

/// Same extension for the direction-barrier factor k_b / (bound - psi).
inline double soft_dir_barrier_factor(double psi, const Gains& g) {
  const double p0 = 0.9 * g.dir_err_max_sq;
  if (psi <= p0) return g.kb_dir / (g.dir_err_max_sq - psi);
  const double d0 = g.dir_err_max_sq - p0;
  return g.kb_dir / d0 + g.kb_dir * (psi - p0) / (d0 * d0);
}

/// Layers 1-3 evaluated together: payload virtual force, its derivative
/// chain, the cable length and direction laws and the assembled force. Shared
/// between the flight controller and the horizon solver's embedded model.
struct CableLoop {
  PositionCommand pos;
  CommandDerivatives der;
  Vec3 e_q;
  Vec3 e_omega;
  double psi_q = 0.0;
  double e_L = 0.0;
  double eL_dot = 0.0;
  double f_c = 0.0;
  Vec3 F_c_par;
  Vec3 F_c_perp;
  Vec3 F_c;
  Vec3 Fc_dot;  // filled only when with_force_derivative
};

inline CableLoop cable_loop(const Vec3& payload_pos, const Vec3& payload_vel,
                            const Vec3& q, const Vec3& omega, double cable_len,
                            double cable_len_rate, const PayloadRef& pref,
                            const CableRef& cref, const Gains& g,
                            const PhysicalParams& p, bool with_force_derivative,
                            bool soft_barriers = false) {
  CableLoop out;
  const Vec3 e_x = payload_pos - pref.d[0];
  const Vec3 e_v = payload_vel - pref.d[1];
  out.pos = position_control(e_x, e_v, q, pref, g, p);
  out.der = command_derivatives(e_x, e_v, out.pos.F_L, q, omega, pref, g, p);

  const Vec3 q_dot = omega.cross(q);
  out.e_L = cable_len - cref.d[0];
  out.eL_dot = cable_len_rate - cref.d[1];
  const S2Error s2 = s2_error(out.pos.q_d, q);
  out.e_q = s2.e_q;
  out.psi_q = s2.psi;
  out.e_omega = omega + q.cross(q.cross(out.der.omega_d));

  if (soft_barriers) {
    out.f_c = -g.kp_len * out.e_L - g.kd_len * out.eL_dot -
              (p.vehicle_mass + p.payload_mass) / p.payload_mass * out.pos.f_L -
              p.vehicle_mass * cable_len * q_dot.squaredNorm() +
              p.vehicle_mass * cref.d[2] - soft_len_barrier_term(out.e_L, g);
    const Vec3 b = -g.kq_dir * out.e_q - g.kw_dir * out.e_omega -
                   q.dot(out.der.omega_d) * q_dot -
                   q.cross(q.cross(out.der.omega_d_dot)) +
                   2.0 * (cable_len_rate / cable_len) * omega -
                   soft_dir_barrier_factor(out.psi_q, g) * out.e_q;
    out.F_c_perp = p.vehicle_mass * cable_len * q.cross(b);
  } else {
    out.f_c = cable_length_control(out.e_L, out.eL_dot, out.pos.f_L, cable_len, q_dot,
                                   cref.d[2], g, p);
    out.F_c_perp =
        cable_direction_control(q, q_dot, omega, cable_len, cable_len_rate, out.e_q,
                                out.e_omega, out.psi_q, out.der.omega_d,
                                out.der.omega_d_dot, g, p);
  }
  out.F_c_par = -out.f_c * q;
  out.F_c = out.F_c_par + out.F_c_perp;

  if (!with_force_derivative) {
    out.Fc_dot = Vec3::Zero();
    return out;
  }

  // Commanded-force derivative with state rates substituted from the reduced
  // closed-loop model (realized thrust vector equal to the commanded force).
  const double m_q = p.vehicle_mass;
  const double bound2 = g.len_err_max * g.len_err_max;
  const double b2 = bound2 - out.e_L * out.e_L;
  const double fL_dot = out.der.FL_dot.dot(q) + out.pos.F_L.dot(q_dot);
  const double eL_ddot =
      (-g.kp_len * out.e_L - g.kd_len * out.eL_dot - g.ka_len * out.e_L / b2) / m_q;
  const double len_acc_model = eL_ddot + cref.d[2];
  const Vec3 omega_dot_model =
      (-q.cross(out.F_c) - 2.0 * m_q * cable_len_rate * omega) / (m_q * cable_len);
  const Vec3 q_ddot_model = omega_dot_model.cross(q) + omega.cross(q_dot);

  const double fc_dot =
      -g.kp_len * out.eL_dot - g.kd_len * eL_ddot -
      (p.vehicle_mass + p.payload_mass) / p.payload_mass * fL_dot -
      m_q * (cable_len_rate * q_dot.squaredNorm() + 2.0 * cable_len * q_dot.dot(q_ddot_model)) +
      m_q * cref.d[3] - g.ka_len * out.eL_dot * (bound2 + out.e_L * out.e_L) / (b2 * b2);
  const Vec3 fc_par_dot = -fc_dot * q - out.f_c * q_dot;

  const Vec3 eq_dot = out.der.qd_dot.cross(q) + out.pos.q_d.cross(q_dot);
  const Vec3 eomega_dot = omega_dot_model + q.dot(out.der.omega_d) * q_dot +
                          q_dot.dot(out.der.omega_d) * q +
                          q.cross(q.cross(out.der.omega_d_dot));
  const double psi_dot = -(q_dot.dot(out.pos.q_d) + q.dot(out.der.qd_dot));
  const double dir_b2 = g.dir_err_max_sq - out.psi_q;

  // Third-order extension of the commanded-direction chain, needed for the
  // rate of the desired angular acceleration feedforward.
  const double m_l = p.payload_mass;
  const double fL_ddot = out.der.FL_ddot.dot(q) + 2.0 * out.der.FL_dot.dot(q_dot) +
                         out.pos.F_L.dot(q_ddot_model);
  const Vec3 ev_dot = out.pos.f_L * q / m_l - pref.d[2] - p.gravity * e3();
  const Vec3 ev_ddot = (fL_dot * q + out.pos.f_L * q_dot) / m_l - pref.d[3];
  const Vec3 ev_dddot =
      (fL_ddot * q + 2.0 * fL_dot * q_dot + out.pos.f_L * q_ddot_model) / m_l - pref.d[4];
  const Vec3 e_x_loc = payload_pos - pref.d[0];
  const Vec3 e_v_loc = payload_vel - pref.d[1];
  const Vec3 th_x = tanh3(e_x_loc);
  const Vec3 th_v = tanh3(e_v_loc);
  const Vec3 s2_x = sech3(e_x_loc).cwiseAbs2();
  const Vec3 s2_v = sech3(e_v_loc).cwiseAbs2();
  const Vec3 ds2_x = -2.0 * s2_x.cwiseProduct(th_x).cwiseProduct(e_v_loc);
  const Vec3 ds2_v = -2.0 * s2_v.cwiseProduct(th_v).cwiseProduct(ev_dot);
  // d^2/dt^2 sech^2(a) = 4 S T^2 adot^2 - 2 S^2 adot^2 - 2 S T addot.
  const Vec3 dds2_x = 4.0 * s2_x.cwiseProduct(th_x.cwiseAbs2()).cwiseProduct(e_v_loc.cwiseAbs2()) -
                      2.0 * s2_x.cwiseAbs2().cwiseProduct(e_v_loc.cwiseAbs2()) -
                      2.0 * s2_x.cwiseProduct(th_x).cwiseProduct(ev_dot);
  const Vec3 dds2_v = 4.0 * s2_v.cwiseProduct(th_v.cwiseAbs2()).cwiseProduct(ev_dot.cwiseAbs2()) -
                      2.0 * s2_v.cwiseAbs2().cwiseProduct(ev_dot.cwiseAbs2()) -
                      2.0 * s2_v.cwiseProduct(th_v).cwiseProduct(ev_ddot);
  const Vec3 FL_dddot =
      -g.kp_pos.cwiseProduct(dds2_x.cwiseProduct(e_v_loc) + 2.0 * ds2_x.cwiseProduct(ev_dot) +
                             s2_x.cwiseProduct(ev_ddot)) -
      g.kd_pos.cwiseProduct(dds2_v.cwiseProduct(ev_dot) + 2.0 * ds2_v.cwiseProduct(ev_ddot) +
                            s2_v.cwiseProduct(ev_dddot)) +
      m_l * pref.d[5];
  // Leibniz on u/n for the third derivative of the normalized force.
  const Vec3& u = out.pos.F_L;
  const Vec3& u1 = out.der.FL_dot;
  const Vec3& u2 = out.der.FL_ddot;
  const double n = u.norm();
  const double n1 = u.dot(u1) / n;
  const double n2 = (u1.squaredNorm() + u.dot(u2)) / n - n1 * n1 / n;
  const double n3 = (3.0 * u1.dot(u2) + u.dot(FL_dddot)) / n - 3.0 * n1 * n2 / n;
  const double i1 = -n1 / (n * n);
  const double i2 = -n2 / (n * n) + 2.0 * n1 * n1 / (n * n * n);
  const double i3 = -n3 / (n * n) + 6.0 * n1 * n2 / (n * n * n) -
                    6.0 * n1 * n1 * n1 / (n * n * n * n);
  const Vec3 qd_dddot = -(FL_dddot / n + 3.0 * u2 * i1 + 3.0 * u1 * i2 + u * i3);
  const Vec3 omega_d_ddot =
      out.der.qd_dot.cross(out.der.qd_ddot) + out.pos.q_d.cross(qd_dddot);

  const Vec3 b = -g.kq_dir * out.e_q - g.kw_dir * out.e_omega -
                 q.dot(out.der.omega_d) * q_dot - q.cross(q.cross(out.der.omega_d_dot)) +
                 2.0 * (cable_len_rate / cable_len) * omega -
                 g.kb_dir * out.e_q / dir_b2;
  const Vec3 b_dot =
      -g.kq_dir * eq_dot - g.kw_dir * eomega_dot -
      (q_dot.dot(out.der.omega_d) + q.dot(out.der.omega_d_dot)) * q_dot -
      q.dot(out.der.omega_d) * q_ddot_model -
      (q_dot * q.dot(out.der.omega_d_dot) + q * q_dot.dot(out.der.omega_d_dot)) -
      q.cross(q.cross(omega_d_ddot)) +
      2.0 * ((len_acc_model * cable_len - cable_len_rate * cable_len_rate) /
             (cable_len * cable_len)) * omega +
      2.0 * (cable_len_rate / cable_len) * omega_dot_model -
      g.kb_dir * (eq_dot * dir_b2 + out.e_q * psi_dot) / (dir_b2 * dir_b2);
  const Vec3 fc_perp_dot = m_q * (cable_len_rate * q.cross(b) + cable_len * q_dot.cross(b) +
                                  cable_len * q.cross(b_dot));
  out.Fc_dot = fc_par_dot + fc_perp_dot;
  return out;
}

}  // namespace detail

/// The full four-layer controller. Stateless except for the desired-body-rate
/// derivative estimator, so one instance serves one simulation.
class Controller {
 public:
  Controller(const Gains& gains, const PhysicalParams& params, double dt = 0.01)
      : gains_(gains), params_(params), dt_(dt) {
    gains_.validate();
    params_.validate();
  }

  const Gains& gains() const { return gains_; }
  const PhysicalParams& params() const { return params_; }

  void reset() {
    has_prev_ = false;
    omega_d_dot_filt_ = Vec3::Zero();
  }

  /// One control evaluation at the measured state. Throws BarrierViolation /
  /// DegenerateForce (tagged with the offending layer) when outside the
  /// admissible domain.
  CommandState step(const SystemState& s, const ReferenceSample& ref) {
    CommandState c;
    c.e_x = s.payload_pos - ref.payload.d[0];
    c.e_v = s.payload_vel - ref.payload.d[1];

    // The commands are held for a full control period, so feed forward the
    // hold-interval averages of the desired-length accelerations (exact for
    // the polynomial chain up to the unknown top derivative).
    CableRef cable = ref.cable;
    cable.d[2] += cable.d[3] * dt_ / 2.0 + cable.d[4] * dt_ * dt_ / 6.0;
    cable.d[3] += cable.d[4] * dt_ / 2.0;

    const detail::CableLoop loop = detail::cable_loop(
        s.payload_pos, s.payload_vel, s.cable_dir, s.cable_omega, s.cable_len,
        s.cable_len_rate, ref.payload, cable, gains_, params_, true);

    c.F_L = loop.pos.F_L;
    c.q_d = loop.pos.q_d;
    c.f_L = loop.pos.f_L;
    c.FL_dot = loop.der.FL_dot;
    c.FL_ddot = loop.der.FL_ddot;
    c.qd_dot = loop.der.qd_dot;
    c.qd_ddot = loop.der.qd_ddot;
    c.omega_d = loop.der.omega_d;
    c.omega_d_dot = loop.der.omega_d_dot;
    c.e_q = loop.e_q;
    c.e_omega = loop.e_omega;
    c.psi_q = loop.psi_q;
    c.e_L = loop.e_L;
    c.eL_dot = loop.eL_dot;
    c.f_c = loop.f_c;
    c.F_c_par = loop.F_c_par;
    c.F_c_perp = loop.F_c_perp;
    c.Fc_dot = loop.Fc_dot;

    const ThrustCommand tc = assemble_thrust(loop.F_c_par, loop.F_c_perp, s.attitude);
    c.F_c = tc.F_c;
    c.thrust = tc.thrust;

    const AttitudeSetpoint sp = attitude_setpoint(c.F_c, c.Fc_dot, gains_);
    c.R_d = sp.R_d;
    c.Omega_d = sp.Omega_d;
    c.Omega_d_dot = update_rate_derivative(sp.Omega_d);

    const SO3Error ae = so3_error(c.R_d, s.attitude, c.Omega_d, s.body_rate);
    c.e_R = ae.e_R;
    c.e_Omega = ae.e_Omega;
    c.torque = attitude_control(c.e_R, c.e_Omega, s.body_rate, s.attitude, c.R_d,
                                c.Omega_d, c.Omega_d_dot, gains_, params_);

    c.delta_L = c.f_L * s.cable_dir - c.F_L;
    c.delta_bound = c.F_L.norm() * c.e_q.norm();
    c.barrier_len_margin = gains_.len_err_max * gains_.len_err_max - c.e_L * c.e_L;
    c.barrier_dir_margin = gains_.dir_err_max_sq - c.psi_q;
    return c;
  }

  ControlInput input(const CommandState& c) const {
    return ControlInput{c.thrust, c.torque, c.f_L};
  }

 private:
  Vec3 update_rate_derivative(const Vec3& omega_d) {
    Vec3 raw = Vec3::Zero();
    if (has_prev_) raw = (omega_d - prev_omega_d_) / dt_;
    prev_omega_d_ = omega_d;
    has_prev_ = true;
    const double alpha = dt_ / (gains_.ref_rate_filter_tau + dt_);
    omega_d_dot_filt_ += alpha * (raw - omega_d_dot_filt_);
    return omega_d_dot_filt_.cwiseMax(-gains_.ref_accel_sat).cwiseMin(gains_.ref_accel_sat);
  }

  Gains gains_;
  PhysicalParams params_;
  double dt_;
  bool has_prev_ = false;
  Vec3 prev_omega_d_ = Vec3::Zero();
  Vec3 omega_d_dot_filt_ = Vec3::Zero();
};

}  // namespace liftline
