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

#include <Eigen/Dense>
#include <cmath>

#include "liftline/errors.hpp"

namespace liftline {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;

/// Tolerances for the manifold invariants. Unit vectors are kept within
/// kUnitTol of norm one, rotations within kRotTol of orthonormality.
inline constexpr double kUnitTol = 1e-9;
inline constexpr double kRotTol = 1e-8;

inline Vec3 e3() { return Vec3(0.0, 0.0, 1.0); }

/// Skew matrix of a, such that hat(a) * b == a x b for all b.
inline Mat3 hat(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return s;
}

/// Inverse of hat(). Requires S to be skew within 1e-9 (Frobenius).
inline Vec3 vee(const Mat3& s) {
  if ((s + s.transpose()).norm() > 1e-9) {
    throw InvalidInput("vee: matrix is not skew-symmetric");
  }
  return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

inline bool is_unit(const Vec3& v, double tol = kUnitTol) {
  return std::abs(v.norm() - 1.0) <= tol;
}

inline bool is_rotation(const Mat3& r, double tol = kRotTol) {
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

inline void require_unit(const Vec3& v, const char* what) {
  if (!is_unit(v)) throw InvalidInput(std::string(what) + ": not a unit vector");
}

inline void require_rotation(const Mat3& r, const char* what) {
  if (!is_rotation(r)) throw InvalidInput(std::string(what) + ": not a rotation matrix");
}

/// v / |v|. Throws if the norm is too small to define a direction.
inline Vec3 project_unit(const Vec3& v) {
  const double n = v.norm();
  if (n < 1e-12) throw DomainError("project_unit: near-zero vector");
  return v / n;
}

/// Nearest rotation matrix in the Frobenius sense (polar factor, det +1).
inline Mat3 project_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

/// Tracking error on the 2-sphere between a desired and an actual direction.
/// e_q = q_d x q and psi = 1 - q . q_d; they satisfy |e_q|^2 = psi (2 - psi).
/// psi = 2 marks the antipodal configuration; flagging psi against the barrier
/// bound is left to the monitors.
struct S2Error {
  Vec3 e_q;
  double psi;
};

inline S2Error s2_error(const Vec3& q_d, const Vec3& q) {
  return S2Error{q_d.cross(q), 1.0 - q.dot(q_d)};
}

/// Attitude tracking error: e_R = 0.5 (R_d^T R - R^T R_d)^vee and
/// e_Omega = Omega - R^T R_d Omega_d.
struct SO3Error {
  Vec3 e_R;
  Vec3 e_Omega;
};

inline SO3Error so3_error(const Mat3& R_d, const Mat3& R, const Vec3& Omega_d,
                          const Vec3& Omega) {
  const Mat3 a = R_d.transpose() * R;
  const Mat3 skew = 0.5 * (a - a.transpose());
  // Skew by construction; read the components directly.
  const Vec3 e_R(skew(2, 1), skew(0, 2), skew(1, 0));
  return SO3Error{e_R, Omega - a.transpose() * Omega_d};
}

enum class VecMap { Tanh, Cosh, Sech, Ln };

/// Componentwise transcendental map. Ln requires strictly positive entries.
template <typename Derived>
Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
vec_map(const Eigen::MatrixBase<Derived>& h, VecMap kind) {
  Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime> out(
      h.rows(), h.cols());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double x = h(i);
    switch (kind) {
      case VecMap::Tanh:
        out(i) = std::tanh(x);
        break;
      case VecMap::Cosh:
        out(i) = std::cosh(x);
        break;
      case VecMap::Sech:
        out(i) = 1.0 / std::cosh(x);
        break;
      case VecMap::Ln:
        if (x <= 0.0) throw DomainError("vec_map: Ln of non-positive component");
        out(i) = std::log(x);
        break;
    }
  }
  return out;
}

inline Vec3 tanh3(const Vec3& v) { return vec_map(v, VecMap::Tanh); }
inline Vec3 sech3(const Vec3& v) { return vec_map(v, VecMap::Sech); }

/// Rotation about a unit axis by an angle (Rodrigues form).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  const Mat3 k = hat(axis);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

}  // namespace liftline
