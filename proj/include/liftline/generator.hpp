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

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "liftline/controller.hpp"
#include "liftline/dynamics.hpp"
#include "liftline/errors.hpp"
#include "liftline/geometry.hpp"
#include "liftline/reference.hpp"

namespace liftline {

/// Cost weights, box bounds and transcription settings for the online
/// cable-length generator.
struct GeneratorConfig {
  double k1 = 0.1;    // vehicle velocity weight
  double k2 = 100.0;  // cable rate weight
  Vec5 chain_weights = (Vec5() << 0.0, 1.6, 3.2, 2.4, 0.8).finished();
  double k8 = 0.1;    // output (fifth derivative) weight
  double k9 = 0.0;    // altitude soft-constraint weight; term active iff > 0
  double k_z = 2.0;   // altitude wall steepness
  double alt_lower = 14.0;
  double alt_upper = 16.0;
  Vec5 lt_lower = (Vec5() << 0.5, -30.0, -30.0, -30.0, -30.0).finished();
  Vec5 lt_upper = (Vec5() << 25.0, 30.0, 30.0, 30.0, 30.0).finished();
  double u_lower = -50.0;
  double u_upper = 50.0;
  double horizon = 1.0;  // [s]
  int nodes = 20;
  int max_iterations = 5;
  double penalty_init = 1e3;

  void validate() const {
    if (k1 < 0 || k2 < 0 || k8 < 0 || k9 < 0 || (chain_weights.array() < 0).any()) {
      throw ConfigError("GeneratorConfig: weights must be nonnegative");
    }
    if (!(horizon > 0.0) || nodes < 2) {
      throw ConfigError("GeneratorConfig: horizon must be positive, nodes >= 2");
    }
    if ((lt_lower.array() > lt_upper.array()).any() || u_lower > u_upper) {
      throw ConfigError("GeneratorConfig: bounds out of order");
    }
  }
};

/// Optimization state of the generator: vehicle kinematics, cable state and
/// the desired-cable-length chain (value through fourth derivative).
struct GeneralizedState {
  Vec3 vehicle_pos = Vec3::Zero();
  Vec3 vehicle_vel = Vec3::Zero();
  Vec3 cable_dir = -e3();
  Vec3 cable_omega = Vec3::Zero();
  double cable_len = 1.0;
  double cable_len_rate = 0.0;
  Vec5 chain = Vec5::Zero();

  static constexpr int kDim = 19;

  Eigen::Matrix<double, kDim, 1> pack() const {
    Eigen::Matrix<double, kDim, 1> v;
    v << vehicle_pos, vehicle_vel, cable_dir, cable_omega, cable_len, cable_len_rate,
        chain;
    return v;
  }
  static GeneralizedState unpack(const Eigen::Matrix<double, kDim, 1>& v) {
    GeneralizedState s;
    s.vehicle_pos = v.segment<3>(0);
    s.vehicle_vel = v.segment<3>(3);
    s.cable_dir = v.segment<3>(6);
    s.cable_omega = v.segment<3>(9);
    s.cable_len = v(12);
    s.cable_len_rate = v(13);
    s.chain = v.segment<5>(14);
    return s;
  }

  /// Build from a measured plant state plus the current desired chain.
  static GeneralizedState from_system(const SystemState& s, const Vec5& chain) {
    GeneralizedState x;
    const auto veh = quad_from_payload(s);
    x.vehicle_pos = veh.pos;
    x.vehicle_vel = veh.vel;
    x.cable_dir = s.cable_dir;
    x.cable_omega = s.cable_omega;
    x.cable_len = s.cable_len;
    x.cable_len_rate = s.cable_len_rate;
    x.chain = chain;
    return x;
  }

  CableRef cable_ref() const {
    CableRef c;
    for (int i = 0; i < 5; ++i) c.d[i] = chain(i);
    return c;
  }
};

/// Closed-loop generalized dynamics: the payload state is reconstructed from
/// the vehicle state, the position / length / direction control laws are
/// evaluated against the reference and the desired chain, and the plant
/// equations advance under the resulting force with an ideal attitude (the
/// realized thrust vector equals the commanded force). The chain is a pure
/// integrator stack driven by u. With soft_barriers the barrier feedback
/// terms are C1-extended outside the admissible sets so prediction rollouts
/// stay finite; the flight controller itself always uses the hard laws.
inline GeneralizedState xi_dynamics(const GeneralizedState& xi, const PayloadRef& ref,
                                    double u, const Gains& g, const PhysicalParams& p,
                                    bool soft_barriers = true) {
  // Hard runs reject a degenerate cable; prediction rollouts saturate the
  // 1/L factors instead so the solver can steer back from stray candidates.
  double len = xi.cable_len;
  if (soft_barriers) {
    len = std::max(len, 0.05);
  } else if (len <= kMinCableLen) {
    throw CableDegenerate("xi_dynamics: cable length below minimum");
  }
  GeneralizedState x = xi;
  x.cable_len = len;
  const Vec3& q = x.cable_dir;
  const Vec3 q_dot = x.cable_omega.cross(q);
  const Vec3 payload_pos = x.vehicle_pos + len * q;
  const Vec3 payload_vel = x.vehicle_vel + x.cable_len_rate * q + len * q_dot;

  const detail::CableLoop loop =
      detail::cable_loop(payload_pos, payload_vel, q, x.cable_omega, len,
                         x.cable_len_rate, ref, x.cable_ref(), g, p, false,
                         soft_barriers);

  const double m_q = p.vehicle_mass;
  const double m_l = p.payload_mass;
  GeneralizedState d;
  d.vehicle_pos = x.vehicle_vel;
  d.vehicle_vel = (loop.F_c - loop.pos.f_L * q - m_q * p.gravity * e3()) / m_q;
  d.cable_dir = q_dot;
  d.cable_omega =
      (-q.cross(loop.F_c) - 2.0 * m_q * x.cable_len_rate * x.cable_omega) /
      (m_q * len);
  d.cable_len = x.cable_len_rate;
  d.cable_len_rate = ((m_q + m_l) / m_l * loop.pos.f_L - q.dot(loop.F_c) +
                      m_q * len * q_dot.squaredNorm()) /
                     m_q;
  d.chain << x.chain.tail<4>(), u;
  return d;
}

/// Running cost of the generator. The altitude wall is included only when its
/// weight is positive; the exponent is clamped so stray rollouts keep a
/// finite, comparable cost.
inline constexpr double kAltExpClamp = 30.0;

inline double stage_cost(const GeneralizedState& xi, double u, const GeneratorConfig& c) {
  double cost = c.k1 * xi.vehicle_vel.squaredNorm() +
                c.k2 * xi.cable_len_rate * xi.cable_len_rate +
                xi.chain.dot(c.chain_weights.cwiseProduct(xi.chain)) + c.k8 * u * u;
  if (c.k9 > 0.0) {
    const double z = xi.vehicle_pos.z();
    cost += c.k9 * (std::exp(std::min(c.k_z * (c.alt_lower - z), kAltExpClamp)) +
                    std::exp(std::min(c.k_z * (z - c.alt_upper), kAltExpClamp)));
  }
  return cost;
}

namespace detail {

inline double chain_box_penalty(const Vec5& chain, const GeneratorConfig& c,
                                double weight, Vec5* grad = nullptr,
                                Vec5* hess_diag = nullptr) {
  double pen = 0.0;
  for (int i = 0; i < 5; ++i) {
    double viol = 0.0;
    if (chain(i) > c.lt_upper(i)) viol = chain(i) - c.lt_upper(i);
    if (chain(i) < c.lt_lower(i)) viol = chain(i) - c.lt_lower(i);
    pen += weight * viol * viol;
    if (grad) (*grad)(i) = 2.0 * weight * viol;
    if (hess_diag) (*hess_diag)(i) = (viol != 0.0) ? 2.0 * weight : 0.0;
  }
  return pen;
}

inline double chain_violation(const Vec5& chain, const GeneratorConfig& c) {
  double v = 0.0;
  for (int i = 0; i < 5; ++i) {
    v = std::max(v, chain(i) - c.lt_upper(i));
    v = std::max(v, c.lt_lower(i) - chain(i));
  }
  return v;
}

/// Penalty steering predictions away from the cable-length barrier: active
/// once the predicted tracking error L - L_d exceeds 80% of the admissible
/// band, well before the soft-extended feedback saturates.
inline double tracking_domain_penalty(const GeneralizedState& s, const Gains& g,
                                      double weight, double* grad_len = nullptr,
                                      double* hess = nullptr) {
  const double e = s.cable_len - s.chain(0);
  const double e0 = 0.8 * g.len_err_max;
  const double over = std::abs(e) - e0;
  if (grad_len) *grad_len = 0.0;
  if (hess) *hess = 0.0;
  if (over <= 0.0) return 0.0;
  if (grad_len) *grad_len = 2.0 * weight * over * (e > 0.0 ? 1.0 : -1.0);
  if (hess) *hess = 2.0 * weight;
  return weight * over * over;
}

/// One shooting interval: RK4 with zero-order-held control and the payload
/// reference sampled at the stage times, then re-projection of the cable
/// direction and rate.
inline GeneralizedState shoot_interval(const GeneralizedState& s,
                                       const std::array<PayloadRef, 3>& refs, double u,
                                       double h, const Gains& g,
                                       const PhysicalParams& p) {
  using V = Eigen::Matrix<double, GeneralizedState::kDim, 1>;
  const V x0 = s.pack();
  const V k1 = xi_dynamics(s, refs[0], u, g, p).pack();
  const V k2 = xi_dynamics(GeneralizedState::unpack(x0 + 0.5 * h * k1), refs[1], u, g, p).pack();
  const V k3 = xi_dynamics(GeneralizedState::unpack(x0 + 0.5 * h * k2), refs[1], u, g, p).pack();
  const V k4 = xi_dynamics(GeneralizedState::unpack(x0 + h * k3), refs[2], u, g, p).pack();
  GeneralizedState out =
      GeneralizedState::unpack(x0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  const double qn = out.cable_dir.norm();
  if (qn > 1e-12) out.cable_dir /= qn;
  out.cable_omega -= out.cable_dir.dot(out.cable_omega) * out.cable_dir;
  return out;
}

}  // namespace detail

struct SolveResult {
  Eigen::VectorXd controls;                 // size N, hard-clipped to the box
  std::vector<GeneralizedState> trajectory; // N + 1 nodes
  std::vector<Eigen::Matrix<double, 1, GeneralizedState::kDim>> feedback;
  double objective = 0.0;                   // discretized physical cost
  double merit = 0.0;                       // objective + box penalties
  int iterations = 0;
  double max_violation = 0.0;
  bool converged = true;
  bool warm_start_used = false;
};

/// Warm start handed between consecutive solves: the previous control
/// sequence plus the trajectory and Riccati gains it was computed around, so
/// the warm candidate can be evaluated as a closed-loop policy instead of an
/// open-loop replay.
struct WarmStart {
  Eigen::VectorXd controls;
  std::vector<GeneralizedState> trajectory;
  std::vector<Eigen::Matrix<double, 1, GeneralizedState::kDim>> feedback;
  bool valid() const {
    return controls.size() > 0 &&
           trajectory.size() == static_cast<size_t>(controls.size()) + 1 &&
           feedback.size() == static_cast<size_t>(controls.size());
  }
};

/// Receding-horizon solve: sequential Gauss-Newton SQP on the condensed
/// shooting problem with a Riccati backward pass, projection of the control
/// onto its box in the forward pass, and quadratic penalties for the chain
/// box. Returns the best iterate by merit; the warm start is always a
/// candidate, so the returned merit never exceeds the warm start's.
class HorizonSolver {
 public:
  HorizonSolver(const GeneratorConfig& cfg, const Gains& gains, const PhysicalParams& p)
      : cfg_(cfg), gains_(gains), params_(p) {
    cfg_.validate();
  }

  SolveResult solve(const GeneralizedState& xi0,
                    const std::vector<std::array<PayloadRef, 3>>& refs,
                    const WarmStart& warm, double penalty_weight) const {
    const int n = cfg_.nodes;
    if (static_cast<int>(refs.size()) != n) {
      throw InvalidInput("HorizonSolver: need one reference triple per interval");
    }
    // The controller must be defined at the initial node (hard barriers).
    try {
      (void)xi_dynamics(xi0, refs[0][0], 0.0, gains_, params_, false);
    } catch (const Error& e) {
      throw InfeasibleInitial(std::string("horizon solve at infeasible state: ") + e.what());
    }

    // Candidate starts: the warm solution (as a closed-loop policy when its
    // gains are available), then the zero sequence.
    Rollout best;
    best.finite = false;
    bool from_warm = false;
    if (warm.controls.size() == n) {
      const Rollout w = warm.valid()
                            ? rollout_policy(xi0, refs, warm, penalty_weight)
                            : rollout(xi0, refs, clip(warm.controls), penalty_weight);
      if (w.finite) {
        best = w;
        from_warm = true;
      }
    }
    const Rollout zero = rollout(xi0, refs, Eigen::VectorXd::Zero(n), penalty_weight);
    if (zero.finite && (!best.finite || zero.merit < best.merit)) {
      best = zero;
      from_warm = false;
    }
    if (!best.finite) {
      throw InfeasibleInitial("horizon solve: no finite rollout from warm or zero start");
    }

    SolveResult res;
    res.warm_start_used = from_warm;
    int iter = 0;
    std::vector<Eigen::Matrix<double, 1, kNx>> gains;
    for (; iter < cfg_.max_iterations; ++iter) {
      if (!gauss_newton_step(xi0, refs, penalty_weight, best, &gains)) break;
    }
    res.iterations = iter;
    res.converged = iter < cfg_.max_iterations;
    res.controls = best.u;
    res.trajectory = best.traj;
    res.feedback = gains;
    res.objective = best.objective;
    res.merit = best.merit;
    res.max_violation = 0.0;
    for (const auto& s : best.traj) {
      res.max_violation = std::max(res.max_violation, detail::chain_violation(s.chain, cfg_));
    }
    return res;
  }

  SolveResult solve(const GeneralizedState& xi0,
                    const std::vector<std::array<PayloadRef, 3>>& refs,
                    const Eigen::VectorXd& warm_controls, double penalty_weight) const {
    WarmStart w;
    w.controls = warm_controls;
    return solve(xi0, refs, w, penalty_weight);
  }

 private:
  static constexpr int kNx = GeneralizedState::kDim;

  struct Rollout {
    Eigen::VectorXd u;
    std::vector<GeneralizedState> traj;
    double objective = 0.0;
    double merit = 0.0;
    bool finite = false;
  };

  Eigen::VectorXd clip(const Eigen::VectorXd& u) const {
    return u.cwiseMax(cfg_.u_lower).cwiseMin(cfg_.u_upper);
  }

  /// Closed-loop evaluation of a previous solution around its own
  /// trajectory; robust to the initial-state shift between solves.
  Rollout rollout_policy(const GeneralizedState& xi0,
                         const std::vector<std::array<PayloadRef, 3>>& refs,
                         const WarmStart& warm, double penalty_weight) const {
    const int n = cfg_.nodes;
    const double h = cfg_.horizon / n;
    Rollout r;
    r.u.resize(n);
    r.traj.reserve(n + 1);
    r.traj.push_back(xi0);
    double obj = 0.0, pen = 0.0;
    try {
      for (int k = 0; k < n; ++k) {
        const GeneralizedState& s = r.traj.back();
        const auto dx = s.pack() - warm.trajectory[k].pack();
        double uk = warm.controls(k) + warm.feedback[k].dot(dx);
        uk = std::min(std::max(uk, cfg_.u_lower), cfg_.u_upper);
        r.u(k) = uk;
        obj += h * stage_cost(s, uk, cfg_);
        pen += h * (detail::chain_box_penalty(s.chain, cfg_, penalty_weight) +
                    detail::tracking_domain_penalty(s, gains_, penalty_weight));
        r.traj.push_back(detail::shoot_interval(s, refs[k], uk, h, gains_, params_));
      }
      pen += h * (detail::chain_box_penalty(r.traj.back().chain, cfg_, penalty_weight) +
                  detail::tracking_domain_penalty(r.traj.back(), gains_, penalty_weight));
    } catch (const Error&) {
      r.finite = false;
      return r;
    }
    if (!std::isfinite(obj) || !std::isfinite(pen)) {
      r.finite = false;
      return r;
    }
    r.objective = obj;
    r.merit = obj + pen;
    r.finite = true;
    return r;
  }

  Rollout rollout(const GeneralizedState& xi0,
                  const std::vector<std::array<PayloadRef, 3>>& refs,
                  const Eigen::VectorXd& u, double penalty_weight) const {
    const int n = cfg_.nodes;
    const double h = cfg_.horizon / n;
    Rollout r;
    r.u = u;
    r.traj.reserve(n + 1);
    r.traj.push_back(xi0);
    double obj = 0.0, pen = 0.0;
    try {
      for (int k = 0; k < n; ++k) {
        const GeneralizedState& s = r.traj.back();
        obj += h * stage_cost(s, u(k), cfg_);
        pen += h * (detail::chain_box_penalty(s.chain, cfg_, penalty_weight) +
                    detail::tracking_domain_penalty(s, gains_, penalty_weight));
        r.traj.push_back(detail::shoot_interval(s, refs[k], u(k), h, gains_, params_));
      }
      pen += h * (detail::chain_box_penalty(r.traj.back().chain, cfg_, penalty_weight) +
                  detail::tracking_domain_penalty(r.traj.back(), gains_, penalty_weight));
    } catch (const Error&) {
      r.finite = false;
      return r;
    }
    if (!std::isfinite(obj) || !std::isfinite(pen)) {
      r.finite = false;
      return r;
    }
    r.objective = obj;
    r.merit = obj + pen;
    r.finite = true;
    return r;
  }

  /// Quadratic expansion of the stage cost (exact diagonal Hessians; every
  /// term is a square or a convex exponential).
  void cost_expansion(const GeneralizedState& s, double u, double h,
                      double penalty_weight, Eigen::Matrix<double, kNx, 1>& gx,
                      Eigen::Matrix<double, kNx, kNx>& Hx, double& gu, double& Hu) const {
    gx.setZero();
    Hx.setZero();
    for (int i = 0; i < 3; ++i) {
      gx(3 + i) = 2.0 * cfg_.k1 * s.vehicle_vel(i);
      Hx(3 + i, 3 + i) = 2.0 * cfg_.k1;
    }
    gx(13) = 2.0 * cfg_.k2 * s.cable_len_rate;
    Hx(13, 13) = 2.0 * cfg_.k2;
    for (int i = 0; i < 5; ++i) {
      gx(14 + i) = 2.0 * cfg_.chain_weights(i) * s.chain(i);
      Hx(14 + i, 14 + i) = 2.0 * cfg_.chain_weights(i);
    }
    if (cfg_.k9 > 0.0) {
      const double z = s.vehicle_pos.z();
      const double lo = std::exp(std::min(cfg_.k_z * (cfg_.alt_lower - z), kAltExpClamp));
      const double hi = std::exp(std::min(cfg_.k_z * (z - cfg_.alt_upper), kAltExpClamp));
      gx(2) += cfg_.k9 * cfg_.k_z * (hi - lo);
      Hx(2, 2) += cfg_.k9 * cfg_.k_z * cfg_.k_z * (hi + lo);
    }
    Vec5 pg, ph;
    detail::chain_box_penalty(s.chain, cfg_, penalty_weight, &pg, &ph);
    gx.segment<5>(14) += pg;
    Hx.block<5, 5>(14, 14) += ph.asDiagonal();
    double dg, dh;
    detail::tracking_domain_penalty(s, gains_, penalty_weight, &dg, &dh);
    gx(12) += dg;
    gx(14) -= dg;
    Hx(12, 12) += dh;
    Hx(14, 14) += dh;
    Hx(12, 14) -= dh;
    Hx(14, 12) -= dh;
    gx *= h;
    Hx *= h;
    gu = 2.0 * h * cfg_.k8 * u;
    Hu = 2.0 * h * cfg_.k8 + 1e-8;
  }

  /// One Gauss-Newton iteration: finite-difference linearization along the
  /// incumbent rollout, Riccati backward pass, line-searched forward pass
  /// with feedback and box projection. Returns true if the incumbent improved.
  /// K_out receives the Riccati gains of this linearization.
  bool gauss_newton_step(const GeneralizedState& xi0,
                         const std::vector<std::array<PayloadRef, 3>>& refs,
                         double penalty_weight, Rollout& best,
                         std::vector<Eigen::Matrix<double, 1, kNx>>* K_out) const {
    using VecX = Eigen::Matrix<double, kNx, 1>;
    using MatX = Eigen::Matrix<double, kNx, kNx>;
    const int n = cfg_.nodes;
    const double h = cfg_.horizon / n;

    std::vector<MatX> A(n);
    std::vector<VecX> B(n);
    std::vector<VecX> gx(n + 1);
    std::vector<MatX> Hx(n + 1);
    Eigen::VectorXd gu(n), Hu(n);

    // Linearize the shooting map around the incumbent.
    for (int k = 0; k < n; ++k) {
      const GeneralizedState& s = best.traj[k];
      const double uk = best.u(k);
      GeneralizedState nominal;
      try {
        nominal = detail::shoot_interval(s, refs[k], uk, h, gains_, params_);
      } catch (const Error&) {
        return false;
      }
      const VecX base = nominal.pack();
      const VecX xs = s.pack();
      for (int j = 0; j < kNx; ++j) {
        const double eps = 1e-6 * std::max(1.0, std::abs(xs(j)));
        VecX xp = xs;
        xp(j) += eps;
        try {
          A[k].col(j) =
              (detail::shoot_interval(GeneralizedState::unpack(xp), refs[k], uk, h,
                                      gains_, params_)
                   .pack() -
               base) /
              eps;
        } catch (const Error&) {
          return false;
        }
      }
      const double ueps = 1e-6 * std::max(1.0, std::abs(uk));
      try {
        B[k] = (detail::shoot_interval(s, refs[k], uk + ueps, h, gains_, params_).pack() -
                base) /
               ueps;
      } catch (const Error&) {
        return false;
      }
      VecX g;
      MatX H;
      double gus, hus;
      cost_expansion(s, uk, h, penalty_weight, g, H, gus, hus);
      gx[k] = g;
      Hx[k] = H;
      gu(k) = gus;
      Hu(k) = hus;
    }
    {
      // Terminal node carries the box and domain penalties only.
      gx[n].setZero();
      Hx[n].setZero();
      Vec5 pg, ph;
      detail::chain_box_penalty(best.traj[n].chain, cfg_, penalty_weight, &pg, &ph);
      gx[n].segment<5>(14) = h * pg;
      Hx[n].block<5, 5>(14, 14) = h * ph.asDiagonal();
      double dg, dh;
      detail::tracking_domain_penalty(best.traj[n], gains_, penalty_weight, &dg, &dh);
      gx[n](12) += h * dg;
      gx[n](14) -= h * dg;
      Hx[n](12, 12) += h * dh;
      Hx[n](14, 14) += h * dh;
      Hx[n](12, 14) -= h * dh;
      Hx[n](14, 12) -= h * dh;
    }

    // Riccati backward pass.
    std::vector<Eigen::Matrix<double, 1, kNx>> K(n);
    Eigen::VectorXd d(n);
    MatX P = Hx[n];
    VecX p = gx[n];
    for (int k = n - 1; k >= 0; --k) {
      const VecX Qx = gx[k] + A[k].transpose() * p;
      const double Qu = gu(k) + B[k].dot(p);
      const MatX AtP = A[k].transpose() * P;
      const MatX Qxx = Hx[k] + AtP * A[k];
      const double Quu = Hu(k) + B[k].dot(P * B[k]);
      const Eigen::Matrix<double, 1, kNx> Qux = B[k].transpose() * P * A[k];
      K[k] = -Qux / Quu;
      d(k) = -Qu / Quu;
      P = Qxx + K[k].transpose() * (Quu * K[k]) + K[k].transpose() * Qux +
          Qux.transpose() * K[k];
      P = 0.5 * (P + P.transpose());
      p = Qx + K[k].transpose() * (Quu * d(k)) + K[k].transpose() * Qu +
          Qux.transpose() * d(k);
    }
    if (K_out) *K_out = K;

    // Forward pass with feedback, projection and backtracking on the merit.
    for (double alpha : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
      Eigen::VectorXd u_try(n);
      std::vector<GeneralizedState> traj;
      traj.reserve(n + 1);
      traj.push_back(xi0);
      double obj = 0.0, pen = 0.0;
      bool ok = true;
      try {
        for (int k = 0; k < n; ++k) {
          const VecX dx = traj[k].pack() - best.traj[k].pack();
          double uk = best.u(k) + alpha * d(k) + K[k].dot(dx);
          uk = std::min(std::max(uk, cfg_.u_lower), cfg_.u_upper);
          u_try(k) = uk;
          obj += h * stage_cost(traj[k], uk, cfg_);
          pen += h * (detail::chain_box_penalty(traj[k].chain, cfg_, penalty_weight) +
                      detail::tracking_domain_penalty(traj[k], gains_, penalty_weight));
          traj.push_back(detail::shoot_interval(traj[k], refs[k], uk, h, gains_, params_));
        }
        pen += h * (detail::chain_box_penalty(traj.back().chain, cfg_, penalty_weight) +
                    detail::tracking_domain_penalty(traj.back(), gains_, penalty_weight));
      } catch (const Error&) {
        ok = false;
      }
      if (!ok || !std::isfinite(obj + pen)) continue;
      if (obj + pen < best.merit - 1e-12) {
        best.u = u_try;
        best.traj = std::move(traj);
        best.objective = obj;
        best.merit = obj + pen;
        return true;
      }
    }
    return false;
  }

  GeneratorConfig cfg_;
  Gains gains_;
  PhysicalParams params_;
};

/// Stateful receding-horizon generator: owns the desired-length chain,
/// re-solves every controller period, applies the first optimized control to
/// the chain, and hands the controller the chain sample for the current step.
class Generator {
 public:
  Generator(const GeneratorConfig& cfg, const Gains& gains, const PhysicalParams& p,
            const Vec5& initial_chain)
      : cfg_(cfg), gains_(gains), params_(p), solver_(cfg, gains, p),
        chain_(initial_chain), penalty_weight_(cfg.penalty_init) {}

  struct StepInfo {
    CableRef cable;        // chain sample consumed by the controller this step
    int iterations = 0;
    double objective = 0.0;
    double max_violation = 0.0;
    bool converged = true;
    double first_control = 0.0;
    double solve_ms = 0.0;  // wall time; excluded from deterministic logs
  };

  const Vec5& chain() const { return chain_; }
  double penalty_weight() const { return penalty_weight_; }

  StepInfo step(const SystemState& measured, double t, const Reference& ref,
                double control_dt) {
    const auto t0 = std::chrono::steady_clock::now();
    const GeneralizedState xi0 = GeneralizedState::from_system(measured, chain_);
    const auto refs = sample_refs(t, ref);

    // Shift the previous solution by one controller period: index each new
    // node into the old piecewise-constant solution, carrying the trajectory
    // and gains along so the warm start can be replayed in closed loop.
    WarmStart warm;
    if (warm_.valid() && warm_.controls.size() == cfg_.nodes) {
      const double h = cfg_.horizon / cfg_.nodes;
      const int n = cfg_.nodes;
      warm.controls.resize(n);
      warm.trajectory.resize(n + 1);
      warm.feedback.resize(n);
      for (int k = 0; k < n; ++k) {
        const int src = std::min(n - 1, static_cast<int>((k * h + control_dt) / h));
        warm.controls(k) = warm_.controls(src);
        warm.trajectory[k] = warm_.trajectory[src];
        warm.feedback[k] = warm_.feedback[src];
      }
      warm.trajectory[n] = warm_.trajectory[n];
    } else {
      warm.controls = warm_.controls;
    }

    SolveResult sol = solver_.solve(xi0, refs, warm, penalty_weight_);
    warm_.controls = sol.controls;
    warm_.trajectory = sol.trajectory;
    warm_.feedback = sol.feedback;
    if (sol.max_violation > 1e-6) {
      penalty_weight_ = std::min(penalty_weight_ * 2.0, 1e9);
    }

    StepInfo info;
    info.cable = cable_sample();
    info.iterations = sol.iterations;
    info.objective = sol.objective;
    info.max_violation = sol.max_violation;
    info.converged = sol.converged;
    info.first_control = sol.controls(0);
    advance_chain(sol.controls(0), control_dt);
    info.solve_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    return info;
  }

  /// Exact Taylor update of the integrator chain under constant top input.
  void advance_chain(double u, double dt) {
    const double t2 = dt * dt / 2.0, t3 = dt * dt * dt / 6.0,
                 t4 = dt * dt * dt * dt / 24.0, t5 = dt * dt * dt * dt * dt / 120.0;
    Vec5 next;
    next(0) = chain_(0) + chain_(1) * dt + chain_(2) * t2 + chain_(3) * t3 +
              chain_(4) * t4 + u * t5;
    next(1) = chain_(1) + chain_(2) * dt + chain_(3) * t2 + chain_(4) * t3 + u * t4;
    next(2) = chain_(2) + chain_(3) * dt + chain_(4) * t2 + u * t3;
    next(3) = chain_(3) + chain_(4) * dt + u * t2;
    next(4) = chain_(4) + u * dt;
    chain_ = next;
  }

  CableRef cable_sample() const {
    CableRef c;
    for (int i = 0; i < 5; ++i) c.d[i] = chain_(i);
    return c;
  }

  std::vector<std::array<PayloadRef, 3>> sample_refs(double t, const Reference& ref) const {
    const double h = cfg_.horizon / cfg_.nodes;
    std::vector<std::array<PayloadRef, 3>> out(cfg_.nodes);
    for (int k = 0; k < cfg_.nodes; ++k) {
      const double tk = t + k * h;
      out[k] = {ref.payload(tk), ref.payload(tk + 0.5 * h), ref.payload(tk + h)};
    }
    return out;
  }

 private:
  GeneratorConfig cfg_;
  Gains gains_;
  PhysicalParams params_;
  HorizonSolver solver_;
  Vec5 chain_;
  WarmStart warm_;
  double penalty_weight_;
};

}  // namespace liftline
