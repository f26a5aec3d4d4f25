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

#include "liftline/lyapunov.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "liftline/rng.hpp"

using namespace liftline;

namespace {
const PhysicalParams kParams;
const Gains kGains;
}  // namespace

TEST(SelectStabilityGains, DefaultGainValues) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0, 19.62);
  // Length loop: bound = min(sqrt(0.8), 72/100.25).
  EXPECT_NEAR(2.0 * s.beta_len, 72.0 / 100.25, 1e-12);
  EXPECT_NEAR(s.beta_len, 0.3591, 5e-5);
  // Direction loop with zero rate bound: min(sqrt(1.8), 13.68/10.81).
  EXPECT_NEAR(2.0 * s.beta_dir, 13.68 / 10.81, 1e-12);
  EXPECT_NEAR(s.beta_dir, 0.6328, 1e-4);
  EXPECT_GT(s.alpha_len, 0.0);
  EXPECT_GT(s.alpha_dir, 0.0);
  // All sandwich matrices positive definite.
  for (const auto* m : {&s.N_len, &s.W_len, &s.N_dir1, &s.W_dir}) {
    EXPECT_GT((*m)(0, 0), 0.0);
    EXPECT_GT(m->determinant(), 0.0);
  }
  // Growth-restriction constants for the default gains.
  EXPECT_NEAR(s.k_f, 2.0 * std::sqrt(2.0) * 6.0, 1e-12);
  EXPECT_NEAR(s.c_f, 19.62 / (std::sqrt(2.0) * 6.0), 1e-12);
}

TEST(SelectStabilityGains, ZeroDampingFails) {
  Gains g = kGains;
  g.kd_len = 0.0;
  EXPECT_THROW(select_stability_gains(g, kParams, 0.0), GainSelectionError);
}

TEST(SelectStabilityGains, RateBoundShrinksBetaDir) {
  const StabilityGains a = select_stability_gains(kGains, kParams, 0.0);
  const StabilityGains b = select_stability_gains(kGains, kParams, 2.0);
  EXPECT_LT(b.beta_dir, a.beta_dir);
  EXPECT_LT(b.alpha_dir, a.alpha_dir);
}

TEST(V1Function, ZeroAtOrigin) {
  EXPECT_EQ(V1(Vec3::Zero(), Vec3::Zero(), kGains, kParams.payload_mass), 0.0);
}

TEST(V1Function, WorkedValue) {
  const double v = V1(Vec3(1, 0, 0), Vec3::Zero(), kGains, kParams.payload_mass);
  EXPECT_NEAR(v, 2.0 * std::log(std::cosh(1.0)), 1e-12);
  EXPECT_NEAR(v, 0.867562, 1e-6);
}

TEST(V1Function, EvenSymmetry) {
  CounterRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = rng.gaussian3();
    const Vec3 b = rng.gaussian3();
    EXPECT_NEAR(V1(a, b, kGains, 2.0), V1(-a, -b, kGains, 2.0), 1e-12);
  }
}

TEST(V2Function, ZeroAtOrigin) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0);
  EXPECT_EQ(V2(0.0, 0.0, s, kGains, kParams.vehicle_mass), 0.0);
}

TEST(V2Function, WorkedValue) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0);
  const double v = V2(0.1, 0.0, s, kGains, kParams.vehicle_mass);
  const double expected =
      0.4 * 0.01 + 0.05 * std::log(0.0625 / 0.0525);
  EXPECT_NEAR(v, expected, 1e-12);
  EXPECT_NEAR(v, 0.0127177, 1e-6);
}

TEST(V2Function, DomainGuard) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0);
  EXPECT_THROW(V2(0.25, 0.0, s, kGains, kParams.vehicle_mass), BarrierViolation);
}

// Quadratic sandwich: z^T N_len z / 2 <= V2 without the barrier term, and the
// barrier term is nonnegative, so z^T N_len z / 2 <= V2 in the domain.
TEST(V2Function, SandwichLowerBound) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0);
  CounterRng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double e = 0.249 * (2.0 * rng.uniform() - 1.0);
    const double ed = 2.0 * (2.0 * rng.uniform() - 1.0);
    const Eigen::Vector2d z(e, ed);
    const double v = V2(e, ed, s, kGains, kParams.vehicle_mass);
    EXPECT_GE(v, 0.5 * z.dot(s.N_len * z) - 1e-12);
    EXPECT_GE(v, -1e-12);
  }
}

TEST(V3Function, ZeroAtOrigin) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0);
  EXPECT_EQ(V3(Vec3::Zero(), Vec3::Zero(), 0.0, s, kGains), 0.0);
}

TEST(V3Function, SandwichBounds) {
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0);
  CounterRng rng(7);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    // Admissible pair: random directions with psi inside the barrier.
    const Vec3 q = rng.unit_vector();
    Vec3 axis = rng.gaussian3();
    axis -= q.dot(axis) * q;
    if (axis.norm() < 1e-9) continue;
    axis.normalize();
    const double angle = 0.31 * rng.uniform();  // psi < 1 - cos(0.31) approx 0.048
    const Vec3 q_d = axis_angle(axis, angle) * q;
    const S2Error s2 = s2_error(q_d, q);
    if (s2.psi >= kGains.dir_err_max_sq) continue;
    Vec3 omega = rng.gaussian3();
    omega -= q.dot(omega) * q;
    Vec3 omega_d = rng.gaussian3();
    omega_d -= q_d.dot(omega_d) * q_d;
    const Vec3 e_w = omega + q.cross(q.cross(omega_d));
    const double v = V3(s2.e_q, e_w, s2.psi, s, kGains);
    const Eigen::Vector2d z(s2.e_q.norm(), e_w.norm());
    EXPECT_GE(v, 0.5 * z.dot(s.N_dir1 * z) - 1e-10);
    ++checked;
  }
  EXPECT_GT(checked, 50000);
}

TEST(AppendixMargin, ZeroAtExactTracking) {
  const Vec3 q(0, 0, -1);
  EXPECT_NEAR(appendix_a_margin(q, q, Vec3::Zero(), Vec3::Zero()), 0.0, 1e-15);
}

TEST(AppendixMargin, NonNegativeOnRandomAdmissibleStates) {
  CounterRng rng(9);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 q = rng.unit_vector();
    const Vec3 q_d = rng.unit_vector();
    Vec3 omega = 3.0 * rng.gaussian3();
    omega -= q.dot(omega) * q;
    Vec3 omega_d = 3.0 * rng.gaussian3();
    omega_d -= q_d.dot(omega_d) * q_d;
    const double m = appendix_a_margin(q, q_d, omega, omega_d);
    EXPECT_GE(m, -1e-12 * (1.0 + omega.squaredNorm() + omega_d.squaredNorm()));
  }
}

// The closed-form rate of e_q must match finite differences along kinematic
// trajectories qdot = omega x q, qddot_d = omega_d x q_d with constant rates.
TEST(AppendixMargin, ClosedFormMatchesFiniteDifference) {
  CounterRng rng(13);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Vec3 q0 = rng.unit_vector();
    Vec3 omega = rng.gaussian3();
    omega -= q0.dot(omega) * q0;
    const Vec3 qd0 = rng.unit_vector();
    Vec3 omega_d = rng.gaussian3();
    omega_d -= qd0.dot(omega_d) * qd0;

    auto q_of = [&](double t) { return (axis_angle(omega.normalized(), omega.norm() * t) * q0).eval(); };
    auto qd_of = [&](double t) {
      return (axis_angle(omega_d.normalized(), omega_d.norm() * t) * qd0).eval();
    };
    if (omega.norm() < 1e-6 || omega_d.norm() < 1e-6) continue;

    const Vec3 eq_plus = qd_of(h).cross(q_of(h));
    const Vec3 eq_minus = qd_of(-h).cross(q_of(-h));
    const Vec3 fd = (eq_plus - eq_minus) / (2.0 * h);
    // omega stays the spatial rate of q under this rotation flow; same for
    // omega_d, but expressed against the rotated q_d it must be re-projected.
    const Vec3 closed = eq_dot_closed_form(q0, qd0, omega, omega_d);
    EXPECT_LT((closed - fd).norm(), 1e-5 * (1.0 + fd.norm()));
  }
}

TEST(GrowthMargin, HoldsOnRandomSamples) {
  const Reference ref = Reference::circle_descent();
  // Gamma over this reference: sup |m_L xdd + m_L g e3|.
  double gamma = 0.0;
  for (double t = 0.0; t <= 30.0; t += 0.001) {
    gamma = std::max(gamma, (kParams.payload_mass * ref.payload(t).d[2] +
                             kParams.payload_mass * kParams.gravity * e3())
                                .norm());
  }
  const StabilityGains s = select_stability_gains(kGains, kParams, 0.0, gamma);
  CounterRng rng(17);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 e_x = 5.0 * rng.gaussian3();
    const Vec3 e_v = 5.0 * rng.gaussian3();
    const PayloadRef pr = ref.payload(30.0 * rng.uniform());
    PositionCommand pc;
    try {
      pc = position_control(e_x, e_v, rng.unit_vector(), pr, kGains, kParams);
    } catch (const DegenerateForce&) {
      continue;
    }
    EXPECT_GE(growth_margin(pc.F_L, e_x, e_v, s), -1e-9);
  }
}
