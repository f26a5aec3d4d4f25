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

#include "liftline/controller.hpp"
#include "liftline/errors.hpp"
#include "liftline/geometry.hpp"

namespace liftline {

/// Certified decay machinery: cross-term weights, quadratic sandwich
/// matrices, decay rates and the growth-restriction constants.
struct StabilityGains {
  double beta_len = 0.0;
  double beta_dir = 0.0;
  double alpha_len = 0.0;  // exponential rate for the cable-length function
  double alpha_dir = 0.0;  // exponential rate for the direction function
  double C_omega = 0.0;    // bound on |(2I - q q^T) omega_d| over the run
  double k_f = 0.0;        // linear-growth slope of the virtual force
  double c_f = 0.0;        // radius below which the force bound is constant
  double Gamma = 0.0;      // sup of |m_L xdd_des + m_L g e3| over the run
  Eigen::Matrix2d N_len, W_len, N_dir1, N_dir2, W_dir;
};

namespace detail {

inline bool sylvester_pd(const Eigen::Matrix2d& m) {
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

inline double lambda_min2(const Eigen::Matrix2d& m) {
  const double tr = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m.determinant();
  return tr - std::sqrt(std::max(tr * tr - det, 0.0));
}

inline double lambda_max2(const Eigen::Matrix2d& m) {
  const double tr = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m.determinant();
  return tr + std::sqrt(std::max(tr * tr - det, 0.0));
}

}  // namespace detail

/// Assemble the certified-decay constants for a gain set. The cross-term
/// weights are placed mid-interval (half their admissible upper bounds),
/// which keeps every sandwich matrix safely positive definite. Throws
/// GainSelectionError when a matrix fails the Sylvester check.
inline StabilityGains select_stability_gains(const Gains& g, const PhysicalParams& p,
                                             double C_omega_est, double Gamma = 0.0) {
  if (C_omega_est < 0.0) throw InvalidInput("select_stability_gains: C_omega_est < 0");
  StabilityGains s;
  s.C_omega = C_omega_est;
  s.Gamma = Gamma;
  const double m_q = p.vehicle_mass;

  const double beta_len_bound =
      std::min(std::sqrt(g.kp_len / m_q),
               4.0 * g.kp_len * g.kd_len / (4.0 * m_q * g.kp_len + g.kd_len * g.kd_len));
  s.beta_len = 0.5 * beta_len_bound;

  const double kwc = g.kw_dir + C_omega_est;
  const double beta_dir_bound =
      std::min(std::sqrt(g.kq_dir), 4.0 * g.kq_dir * g.kw_dir / (4.0 * g.kq_dir + kwc * kwc));
  s.beta_dir = 0.5 * beta_dir_bound;

  s.N_len << g.kp_len / m_q, s.beta_len, s.beta_len, 1.0;
  s.W_len << s.beta_len * g.kp_len / m_q, s.beta_len * g.kd_len / (2.0 * m_q),
      s.beta_len * g.kd_len / (2.0 * m_q), g.kd_len / m_q - s.beta_len;
  s.N_dir1 << g.kq_dir, -s.beta_dir, -s.beta_dir, 1.0;
  s.N_dir2 << 2.0 * g.kq_dir / (2.0 - g.dir_err_max_sq), s.beta_dir, s.beta_dir, 1.0;
  s.W_dir << s.beta_dir * g.kq_dir, -0.5 * s.beta_dir * kwc, -0.5 * s.beta_dir * kwc,
      g.kw_dir - s.beta_dir;

  if (!detail::sylvester_pd(s.N_len) || !detail::sylvester_pd(s.W_len) ||
      !detail::sylvester_pd(s.N_dir1) || !detail::sylvester_pd(s.W_dir)) {
    throw GainSelectionError("select_stability_gains: sandwich matrix not positive definite");
  }

  s.alpha_len = std::min(2.0 * detail::lambda_min2(s.W_len) / detail::lambda_max2(s.N_len),
                         2.0 * s.beta_len);
  s.alpha_dir =
      std::min(2.0 * detail::lambda_min2(s.W_dir) / detail::lambda_max2(s.N_dir2),
               s.beta_dir * (2.0 - g.dir_err_max_sq));

  const double kmax = std::max(g.kp_pos.maxCoeff(), g.kd_pos.maxCoeff());
  s.k_f = 2.0 * std::sqrt(2.0) * kmax;
  s.c_f = Gamma / (std::sqrt(2.0) * kmax);
  return s;
}

/// Payload-loop function: (1/m_L) sum_i kp_i ln cosh(e_x,i) + |e_v|^2 / 2.
inline double V1(const Vec3& e_x, const Vec3& e_v, const Gains& g, double payload_mass) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += g.kp_pos[i] * std::log(std::cosh(e_x[i]));
  return acc / payload_mass + 0.5 * e_v.squaredNorm();
}

/// Cable-length barrier function; well-defined only for |e_L| < len_err_max.
inline double V2(double e_L, double eL_dot, const StabilityGains& s, const Gains& g,
                 double vehicle_mass) {
  const double b2 = g.len_err_max * g.len_err_max;
  if (e_L * e_L >= b2) throw BarrierViolation("V2", std::abs(e_L), g.len_err_max);
  return g.kp_len / (2.0 * vehicle_mass) * e_L * e_L + s.beta_len * e_L * eL_dot +
         0.5 * eL_dot * eL_dot +
         g.ka_len / (2.0 * vehicle_mass) * std::log(b2 / (b2 - e_L * e_L));
}

/// Cable-direction barrier function; well-defined only for psi < dir_err_max_sq.
inline double V3(const Vec3& e_q, const Vec3& e_omega, double psi_q,
                 const StabilityGains& s, const Gains& g) {
  if (psi_q >= g.dir_err_max_sq) throw BarrierViolation("V3", psi_q, g.dir_err_max_sq);
  return g.kq_dir * psi_q + 0.5 * e_omega.squaredNorm() + s.beta_dir * e_q.dot(e_omega) +
         g.kb_dir * std::log(g.dir_err_max_sq / (g.dir_err_max_sq - psi_q));
}

/// Closed-form rate of the direction error e_q = q_d x q, valid for any
/// admissible (q, q_d, omega, omega_d) with q.omega = 0 and q_d.omega_d = 0.
inline Vec3 eq_dot_closed_form(const Vec3& q, const Vec3& q_d, const Vec3& omega,
                               const Vec3& omega_d) {
  const Vec3 e_q = q_d.cross(q);
  const Vec3 e_omega = omega + q.cross(q.cross(omega_d));
  const double qqd = q.dot(q_d);
  return e_omega * qqd - q.dot(omega_d) * qqd * q + e_omega.cross(e_q) +
         (omega_d - q.cross(q.cross(omega_d))).cross(e_q);
}

/// Slack of the cross-term bound  eq_dot . e_omega <= |e_omega|^2
/// + C |e_q||e_omega|  with C evaluated pointwise as |(2I - q q^T) omega_d|.
/// Non-negative for all admissible states up to rounding.
inline double appendix_a_margin(const Vec3& q, const Vec3& q_d, const Vec3& omega,
                                const Vec3& omega_d) {
  const Vec3 e_q = q_d.cross(q);
  const Vec3 e_omega = omega + q.cross(q.cross(omega_d));
  const Vec3 eq_dot = eq_dot_closed_form(q, q_d, omega, omega_d);
  const double c = (2.0 * omega_d - q * q.dot(omega_d)).norm();
  return e_omega.squaredNorm() + c * e_q.norm() * e_omega.norm() - eq_dot.dot(e_omega);
}

/// Growth-restriction slack: |F_L| <= k_f |z_x| outside the ball of radius
/// c_f, and <= k_f c_f inside it.
inline double growth_margin(const Vec3& F_L, const Vec3& e_x, const Vec3& e_v,
                            const StabilityGains& s) {
  const double zx = std::sqrt(e_x.squaredNorm() + e_v.squaredNorm());
  const double bound = (zx >= s.c_f) ? s.k_f * zx : s.k_f * s.c_f;
  return bound - F_L.norm();
}

}  // namespace liftline
