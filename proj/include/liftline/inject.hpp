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

#include "liftline/dynamics.hpp"
#include "liftline/rng.hpp"
#include "liftline/scenario.hpp"

namespace liftline {

/// Measurement model: noise on the controller's inputs only; the plant keeps
/// integrating the true state. The cable-direction perturbation is a random
/// axis-angle rotation, so the measured direction stays unit; the cable rate
/// is re-projected against the perturbed direction.
inline SystemState measure(const SystemState& s, const DisturbanceSpec& d,
                           CounterRng& rng) {
  if (!d.measurement_noise) return s;
  SystemState m = s;
  m.payload_pos += d.pos_noise_std * rng.gaussian3();
  m.payload_vel += d.vel_noise_std * rng.gaussian3();
  m.cable_len += d.len_noise_std * rng.gaussian();
  m.cable_len_rate += d.len_rate_noise_std * rng.gaussian();
  m.body_rate += d.body_rate_noise_std * rng.gaussian3();
  const Vec3 axis = rng.unit_vector();
  const double angle = d.dir_noise_rad * rng.gaussian();
  m.cable_dir = axis_angle(axis, angle) * m.cable_dir;
  m.cable_omega -= m.cable_dir.dot(m.cable_omega) * m.cable_dir;
  if (m.cable_len < 2.0 * kMinCableLen) m.cable_len = 2.0 * kMinCableLen;
  return m;
}

inline Vec3 sample_wind(const DisturbanceSpec& d, CounterRng& rng) {
  if (!d.unmodeled) return Vec3::Zero();
  return d.wind_accel_std.cwiseProduct(rng.gaussian3());
}

/// World-frame half-sine impulse force on the payload.
inline Vec3 impulse_force(double t, const DisturbanceSpec& d) {
  if (!d.impulse) return Vec3::Zero();
  const double s = t - d.impulse_time;
  if (s < 0.0 || s > d.impulse_duration) return Vec3::Zero();
  return d.impulse_amplitude * std::sin(M_PI * s / d.impulse_duration);
}

inline PhysicalParams perturbed_params(const PhysicalParams& p, const DisturbanceSpec& d) {
  if (!d.parameter_mismatch) return p;
  PhysicalParams out = p;
  out.vehicle_mass *= d.vehicle_mass_scale;
  out.payload_mass *= d.payload_mass_scale;
  out.inertia = d.inertia_scale.asDiagonal() * p.inertia;
  return out;
}

/// First-order actuator lag on (thrust, torque, winch force), advanced at the
/// physics rate with the exact exponential update.
class ActuatorLag {
 public:
  explicit ActuatorLag(double tau) : tau_(tau) {}

  ControlInput apply(const ControlInput& cmd, double dt) {
    if (!primed_) {
      state_ = cmd;
      primed_ = true;
      return state_;
    }
    const double a = 1.0 - std::exp(-dt / tau_);
    state_.thrust += a * (cmd.thrust - state_.thrust);
    state_.torque += a * (cmd.torque - state_.torque);
    state_.winch_force += a * (cmd.winch_force - state_.winch_force);
    return state_;
  }

 private:
  double tau_;
  bool primed_ = false;
  ControlInput state_;
};

}  // namespace liftline
