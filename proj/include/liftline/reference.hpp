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

#include <array>
#include <cmath>
#include <string>

#include "liftline/errors.hpp"
#include "liftline/geometry.hpp"

namespace liftline {

/// Desired payload position and its time derivatives. Orders 0..4 feed the
/// control laws; order 5 only sharpens the attitude-rate feedforward chain.
struct PayloadRef {
  std::array<Vec3, 6> d{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                        Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  const Vec3& pos() const { return d[0]; }
  const Vec3& vel() const { return d[1]; }
  const Vec3& acc() const { return d[2]; }
};

/// Desired cable length and its time derivatives through fourth order.
struct CableRef {
  std::array<double, 5> d{0.0, 0.0, 0.0, 0.0, 0.0};
  double len() const { return d[0]; }
  double rate() const { return d[1]; }
  double accel() const { return d[2]; }
};

/// One controller-rate sample of the full reference.
struct ReferenceSample {
  PayloadRef payload;
  CableRef cable;
};

namespace detail {

/// Derivative chain of a*sin(w t + phi): the k-th derivative is
/// a w^k sin(w t + phi + k pi/2).
template <size_t N>
inline void add_sin_chain(std::array<double, N>& out, double a, double w, double phi,
                          double t) {
  double wk = 1.0;
  for (size_t k = 0; k < N; ++k) {
    out[k] += a * wk * std::sin(w * t + phi + 0.5 * M_PI * k);
    wk *= w;
  }
}

template <size_t N>
inline void add_exp_chain(std::array<double, N>& out, double a, double rate, double t) {
  const double v = a * std::exp(rate * t);
  double rk = 1.0;
  for (size_t k = 0; k < N; ++k) {
    out[k] += rk * v;
    rk *= rate;
  }
}

/// Derivative chain of a*exp(-c t^2); Hermite-polynomial prefactors in t.
template <size_t N>
inline void add_gauss_chain(std::array<double, N>& out, double a, double c, double t) {
  const double g = a * std::exp(-c * t * t);
  const double t2 = t * t;
  out[0] += g;
  out[1] += -2.0 * c * t * g;
  out[2] += (4.0 * c * c * t2 - 2.0 * c) * g;
  out[3] += (12.0 * c * c * t - 8.0 * c * c * c * t2 * t) * g;
  out[4] += (16.0 * std::pow(c, 4) * t2 * t2 - 48.0 * std::pow(c, 3) * t2 +
             12.0 * c * c) *
            g;
  if constexpr (N > 5) {
    out[5] += (-32.0 * std::pow(c, 5) * t2 * t2 * t +
               160.0 * std::pow(c, 4) * t2 * t - 120.0 * std::pow(c, 3) * t) *
              g;
  }
}

}  // namespace detail

/// Analytic reference trajectories. All derivative chains are closed-form; no
/// numerical differentiation anywhere.
class Reference {
 public:
  enum class Kind { Hover, CircleDescent, ExpTrig, FigureEight };

  static Reference hover(const Vec3& pos, double cable_len) {
    Reference r;
    r.kind_ = Kind::Hover;
    r.hover_pos_ = pos;
    r.hover_len_ = cable_len;
    return r;
  }
  static Reference circle_descent() {
    Reference r;
    r.kind_ = Kind::CircleDescent;
    return r;
  }
  static Reference exp_trig() {
    Reference r;
    r.kind_ = Kind::ExpTrig;
    return r;
  }
  static Reference figure_eight() {
    Reference r;
    r.kind_ = Kind::FigureEight;
    return r;
  }

  Kind kind() const { return kind_; }
  const Vec3& hover_pos() const { return hover_pos_; }
  double hover_len() const { return hover_len_; }

  PayloadRef payload(double t) const {
    PayloadRef ref;
    std::array<double, 6> x{}, y{}, z{};
    switch (kind_) {
      case Kind::Hover:
        x[0] = hover_pos_.x();
        y[0] = hover_pos_.y();
        z[0] = hover_pos_.z();
        break;
      case Kind::CircleDescent:
        detail::add_sin_chain(x, 2.0, 0.5, 0.0, t);
        detail::add_sin_chain(y, 2.0, 0.5, 0.5 * M_PI, t);
        detail::add_gauss_chain(z, 30.0, 0.005, t);
        break;
      case Kind::ExpTrig:
        detail::add_exp_chain(x, 1.0, 0.1, t);
        detail::add_sin_chain(y, 1.0, 0.5, 0.5 * M_PI, t);
        detail::add_sin_chain(y, 1.0, 0.3, 0.5 * M_PI, t);
        detail::add_sin_chain(z, 2.0, 0.5, 0.25 * M_PI, t);
        detail::add_sin_chain(z, 3.0, 1.0, M_PI, t);
        z[0] += 5.0;
        break;
      case Kind::FigureEight:
        detail::add_sin_chain(x, 1.5, 0.7, 0.0, t);
        detail::add_sin_chain(y, 0.75, 1.4, 0.0, t);
        z[0] = 2.0;
        break;
    }
    for (int k = 0; k < 6; ++k) ref.d[k] = Vec3(x[k], y[k], z[k]);
    return ref;
  }

  /// True when the trajectory carries its own cable-length chain; otherwise a
  /// generator must supply one.
  bool has_cable() const {
    return kind_ == Kind::Hover || kind_ == Kind::FigureEight;
  }

  CableRef cable(double t) const {
    CableRef c;
    switch (kind_) {
      case Kind::Hover:
        c.d[0] = hover_len_;
        break;
      case Kind::FigureEight:
        c.d[0] = 1.85;
        detail::add_sin_chain(c.d, 0.3, 0.25, 0.0, t);
        break;
      default:
        throw ConfigError("Reference: trajectory has no cable-length chain");
    }
    return c;
  }

  static Kind kind_from_string(const std::string& s) {
    if (s == "hover") return Kind::Hover;
    if (s == "circle_descent") return Kind::CircleDescent;
    if (s == "exp_trig") return Kind::ExpTrig;
    if (s == "figure_eight") return Kind::FigureEight;
    throw ConfigError("Reference: unknown trajectory type '" + s + "'");
  }

  static std::string kind_to_string(Kind k) {
    switch (k) {
      case Kind::Hover: return "hover";
      case Kind::CircleDescent: return "circle_descent";
      case Kind::ExpTrig: return "exp_trig";
      case Kind::FigureEight: return "figure_eight";
    }
    return "hover";
  }

 private:
  Kind kind_ = Kind::Hover;
  Vec3 hover_pos_ = Vec3(0.0, 0.0, 2.0);
  double hover_len_ = 1.8;
};

}  // namespace liftline
