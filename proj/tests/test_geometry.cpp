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

#include "liftline/geometry.hpp"

#include <gtest/gtest.h>

#include "liftline/rng.hpp"

using namespace liftline;

TEST(Hat, ZeroVector) {
  EXPECT_EQ(hat(Vec3::Zero()), Mat3::Zero());
}

TEST(Hat, DefinitionExpansion) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(hat(Vec3(1, 2, 3)), expected);
}

TEST(Hat, ActsAsCrossProduct) {
  CounterRng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = rng.gaussian3();
    const Vec3 b = rng.gaussian3();
    EXPECT_LT((hat(a) * b - a.cross(b)).norm(), 1e-14);
  }
}

TEST(Vee, RoundTrip) {
  const Vec3 a(0.3, -1.2, 7.0);
  EXPECT_LT((vee(hat(a)) - a).norm(), 1e-15);
}

TEST(Vee, RandomSkewRoundTrip) {
  CounterRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = 10.0 * rng.gaussian3();
    EXPECT_LT((vee(hat(a)) - a).norm(), 1e-12);
  }
}

TEST(Vee, RejectsNonSkew) {
  Mat3 m = Mat3::Identity();
  EXPECT_THROW(vee(m), InvalidInput);
}

TEST(TripleProduct, Identities) {
  CounterRng rng(13);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 a = rng.gaussian3();
    const Vec3 b = rng.gaussian3();
    const Vec3 c = rng.gaussian3();
    const double lhs = a.dot(b.cross(c));
    EXPECT_NEAR(lhs, b.dot(c.cross(a)), 1e-12 * (1.0 + std::abs(lhs)));
    EXPECT_NEAR(lhs, c.dot(a.cross(b)), 1e-12 * (1.0 + std::abs(lhs)));
  }
}

// For unit p and a with p.a = 0, -hat(p)^2 a = a.
TEST(Hat, DoubleCrossOnOrthogonal) {
  CounterRng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p = rng.unit_vector();
    Vec3 a = rng.gaussian3();
    a -= p.dot(a) * p;
    EXPECT_LT(((-hat(p) * hat(p) * a) - a).norm(), 1e-12 * (1.0 + a.norm()));
  }
}

TEST(S2Error, Aligned) {
  const Vec3 q(0, 0, -1);
  const S2Error e = s2_error(q, q);
  EXPECT_EQ(e.e_q, Vec3::Zero());
  EXPECT_EQ(e.psi, 0.0);
}

TEST(S2Error, SmallTilt) {
  const Vec3 q_d(0, 0, -1);
  const Vec3 q(std::sin(0.1), 0, -std::cos(0.1));
  const S2Error e = s2_error(q_d, q);
  EXPECT_NEAR(e.e_q.x(), 0.0, 1e-15);
  EXPECT_NEAR(e.e_q.y(), -std::sin(0.1), 1e-15);
  EXPECT_NEAR(e.e_q.z(), 0.0, 1e-15);
  EXPECT_NEAR(e.psi, 1.0 - std::cos(0.1), 1e-15);
  EXPECT_NEAR(e.psi, 0.0049958, 1e-7);
}

TEST(S2Error, Antipodal) {
  const S2Error e = s2_error(Vec3(0, 0, -1), Vec3(0, 0, 1));
  EXPECT_EQ(e.e_q, Vec3::Zero());
  EXPECT_EQ(e.psi, 2.0);
  EXPECT_GE(e.psi, 0.1);  // must be flaggable against any barrier bound < 1
}

// |e_q|^2 = psi (2 - psi) on random unit pairs.
TEST(S2Error, ConfigurationIdentity) {
  CounterRng rng(19);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 q_d = rng.unit_vector();
    const Vec3 q = rng.unit_vector();
    const S2Error e = s2_error(q_d, q);
    EXPECT_NEAR(e.e_q.squaredNorm(), e.psi * (2.0 - e.psi), 1e-12);
  }
}

TEST(SO3Error, IdentityCase) {
  const Mat3 r = axis_angle(Vec3(0, 1, 0), 0.7);
  const Vec3 w(0.3, -0.1, 0.2);
  const SO3Error e = so3_error(r, r, w, w);
  EXPECT_LT(e.e_R.norm(), 1e-15);
  EXPECT_LT(e.e_Omega.norm(), 1e-15);
}

TEST(SO3Error, ZRotation) {
  const Mat3 r_d = axis_angle(Vec3(1, 0, 0), 0.4);
  const Mat3 r = axis_angle(Vec3(0, 0, 1), 0.2) * r_d;
  const SO3Error e = so3_error(r_d, r, Vec3::Zero(), Vec3::Zero());
  // For R = rot_z(a) R_d the attitude error reduces to R_d^T [0,0,sin a].
  const Vec3 expected = r_d.transpose() * Vec3(0, 0, std::sin(0.2));
  EXPECT_LT((e.e_R - expected).norm(), 1e-12);
}

TEST(SO3Error, ZRotationIdentityTarget) {
  const Mat3 r = axis_angle(Vec3(0, 0, 1), 0.2);
  const SO3Error e = so3_error(Mat3::Identity(), r, Vec3::Zero(), Vec3::Zero());
  EXPECT_NEAR(e.e_R.z(), std::sin(0.2), 1e-14);
  EXPECT_NEAR(e.e_R.z(), 0.198669, 1e-6);
  EXPECT_NEAR(e.e_R.x(), 0.0, 1e-14);
  EXPECT_NEAR(e.e_R.y(), 0.0, 1e-14);
}

TEST(SO3Error, EqualRates) {
  const SO3Error e = so3_error(Mat3::Identity(), Mat3::Identity(), Vec3(1, 0, 0),
                               Vec3(1, 0, 0));
  EXPECT_EQ(e.e_Omega, Vec3::Zero());
}

TEST(VecMap, TanhZero) {
  EXPECT_EQ(tanh3(Vec3::Zero()), Vec3::Zero());
}

TEST(VecMap, SechZero) {
  Eigen::VectorXd h(1);
  h << 0.0;
  EXPECT_EQ(vec_map(h, VecMap::Sech)(0), 1.0);
}

TEST(VecMap, LnCosh) {
  Eigen::VectorXd h(1);
  h << 0.5;
  const auto v = vec_map(vec_map(h, VecMap::Cosh), VecMap::Ln);
  EXPECT_NEAR(v(0), std::log(std::cosh(0.5)), 1e-15);
  EXPECT_NEAR(v(0), 0.120114, 1e-6);
}

TEST(VecMap, LnRejectsNonPositive) {
  Eigen::VectorXd h(2);
  h << 1.0, -0.5;
  EXPECT_THROW(vec_map(h, VecMap::Ln), DomainError);
}

TEST(ProjectRotation, RestoresOrthonormality) {
  CounterRng rng(23);
  for (int i = 0; i < 1000; ++i) {
    Mat3 r = axis_angle(rng.unit_vector(), 3.0 * rng.uniform());
    Mat3 drift = r + 1e-6 * Mat3::Random();
    const Mat3 fixed = project_rotation(drift);
    EXPECT_LT((fixed.transpose() * fixed - Mat3::Identity()).norm(), 1e-13);
    EXPECT_NEAR(fixed.determinant(), 1.0, 1e-13);
  }
}

TEST(CounterRng, Deterministic) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
  CounterRng c(42), d(43);
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(CounterRng, GaussianMoments) {
  CounterRng rng(5);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gaussian();
    sum += x;
    sum2 += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}
