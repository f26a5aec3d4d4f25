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

#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>

#include "liftline/controller.hpp"
#include "liftline/dynamics.hpp"
#include "liftline/errors.hpp"
#include "liftline/generator.hpp"
#include "liftline/reference.hpp"

namespace liftline {

using nlohmann::json;

/// Uncertainty / disturbance suite. The four cases can be toggled
/// independently; magnitudes default to the robustness-test values.
struct DisturbanceSpec {
  bool measurement_noise = true;
  bool parameter_mismatch = true;
  bool unmodeled = true;  // actuator lag and stochastic wind
  bool impulse = true;

  double pos_noise_std = 0.02;        // [m] per axis
  double vel_noise_std = 0.02;        // [m/s] per axis
  double len_noise_std = 0.02;        // [m]
  double len_rate_noise_std = 0.02;   // [m/s]
  double body_rate_noise_std = 0.01;  // [rad/s] per axis
  double dir_noise_rad = 0.01;        // axis-angle std, keeps |q| = 1

  double vehicle_mass_scale = 1.03;
  double payload_mass_scale = 0.95;
  Vec3 inertia_scale = Vec3(1.10, 0.95, 1.05);

  double actuator_lag = 0.05;                // [s]
  Vec3 wind_accel_std = Vec3(0.6, 0.6, 0.6); // [m/s^2]

  double impulse_time = 8.0;      // [s]
  double impulse_duration = 0.25; // [s]
  Vec3 impulse_amplitude = Vec3(5.0, 1.0, -2.0);  // [N], world frame

  void validate() const {
    if (pos_noise_std < 0 || vel_noise_std < 0 || len_noise_std < 0 ||
        len_rate_noise_std < 0 || body_rate_noise_std < 0 || dir_noise_rad < 0 ||
        (wind_accel_std.array() < 0).any()) {
      throw ConfigError("DisturbanceSpec: standard deviations must be nonnegative");
    }
  }
};

enum class RunMode { Full, ReducedAttitude };

struct ScenarioConfig {
  std::string name = "scenario";
  PhysicalParams params;
  Gains gains;
  std::optional<GeneratorConfig> generator;
  Reference reference = Reference::hover(Vec3(0, 0, 2), 1.8);
  SystemState initial;
  Vec5 initial_chain = Vec5::Zero();
  bool initial_from_vehicle = false;  // initial given as x_Q, payload derived
  double duration = 20.0;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Full;
  std::optional<DisturbanceSpec> disturbance;
  json raw;  // original document, embedded into logs for round-tripping

  static ScenarioConfig from_json(const json& j);
  static ScenarioConfig from_file(const std::string& path);
};

namespace detail {

inline Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string(what) + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Vec5 vec5_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 5) {
    throw ConfigError(std::string(what) + ": expected an array of 5 numbers");
  }
  Vec5 v;
  for (int i = 0; i < 5; ++i) v(i) = j[i].get<double>();
  return v;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void maybe_vec3(const json& j, const char* key, Vec3& out) {
  if (j.contains(key)) out = vec3_from(j.at(key), key);
}

inline void maybe_vec5(const json& j, const char* key, Vec5& out) {
  if (j.contains(key)) out = vec5_from(j.at(key), key);
}

}  // namespace detail

inline ScenarioConfig ScenarioConfig::from_json(const json& j) {
  ScenarioConfig c;
  c.raw = j;
  detail::maybe(j, "name", c.name);

  if (j.contains("params")) {
    const json& p = j.at("params");
    detail::maybe(p, "vehicle_mass", c.params.vehicle_mass);
    detail::maybe(p, "payload_mass", c.params.payload_mass);
    detail::maybe(p, "gravity", c.params.gravity);
    if (p.contains("inertia")) {
      const json& in = p.at("inertia");
      if (in.is_array() && in.size() == 3) {
        c.params.inertia = Vec3(in[0].get<double>(), in[1].get<double>(),
                                in[2].get<double>())
                               .asDiagonal();
      } else if (in.is_array() && in.size() == 9) {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
          for (int col = 0; col < 3; ++col) m(r, col) = in[3 * r + col].get<double>();
        c.params.inertia = m;
      } else {
        throw ConfigError("params.inertia: expected 3 (diagonal) or 9 numbers");
      }
    }
    c.params.validate();
  }

  if (j.contains("gains")) {
    const json& g = j.at("gains");
    detail::maybe_vec3(g, "kp_pos", c.gains.kp_pos);
    detail::maybe_vec3(g, "kd_pos", c.gains.kd_pos);
    detail::maybe(g, "kp_len", c.gains.kp_len);
    detail::maybe(g, "kd_len", c.gains.kd_len);
    detail::maybe(g, "ka_len", c.gains.ka_len);
    detail::maybe(g, "len_err_max", c.gains.len_err_max);
    detail::maybe(g, "kq_dir", c.gains.kq_dir);
    detail::maybe(g, "kw_dir", c.gains.kw_dir);
    detail::maybe(g, "kb_dir", c.gains.kb_dir);
    detail::maybe(g, "dir_err_max_sq", c.gains.dir_err_max_sq);
    detail::maybe(g, "kR", c.gains.kR);
    detail::maybe(g, "kOm", c.gains.kOm);
    detail::maybe(g, "ref_rate_filter_tau", c.gains.ref_rate_filter_tau);
    detail::maybe(g, "ref_accel_sat", c.gains.ref_accel_sat);
    c.gains.validate();
  }

  if (j.contains("generator")) {
    GeneratorConfig g;
    const json& gen = j.at("generator");
    detail::maybe(gen, "k1", g.k1);
    detail::maybe(gen, "k2", g.k2);
    detail::maybe_vec5(gen, "chain_weights", g.chain_weights);
    detail::maybe(gen, "k8", g.k8);
    detail::maybe(gen, "k9", g.k9);
    detail::maybe(gen, "k_z", g.k_z);
    if (gen.contains("altitude_band")) {
      const json& b = gen.at("altitude_band");
      if (!b.is_array() || b.size() != 2) {
        throw ConfigError("generator.altitude_band: expected [lower, upper]");
      }
      g.alt_lower = b[0].get<double>();
      g.alt_upper = b[1].get<double>();
    }
    detail::maybe_vec5(gen, "lt_lower", g.lt_lower);
    detail::maybe_vec5(gen, "lt_upper", g.lt_upper);
    if (gen.contains("u_bounds")) {
      const json& b = gen.at("u_bounds");
      if (!b.is_array() || b.size() != 2) {
        throw ConfigError("generator.u_bounds: expected [lower, upper]");
      }
      g.u_lower = b[0].get<double>();
      g.u_upper = b[1].get<double>();
    }
    detail::maybe(gen, "horizon", g.horizon);
    detail::maybe(gen, "nodes", g.nodes);
    detail::maybe(gen, "max_iterations", g.max_iterations);
    g.validate();
    c.generator = g;
  }

  if (j.contains("reference")) {
    const json& r = j.at("reference");
    const std::string type = r.contains("type") ? r.at("type").get<std::string>() : "hover";
    const Reference::Kind kind = Reference::kind_from_string(type);
    if (kind == Reference::Kind::Hover) {
      Vec3 pos(0, 0, 2);
      double len = 1.8;
      detail::maybe_vec3(r, "position", pos);
      detail::maybe(r, "cable_length", len);
      c.reference = Reference::hover(pos, len);
    } else if (kind == Reference::Kind::CircleDescent) {
      c.reference = Reference::circle_descent();
    } else if (kind == Reference::Kind::ExpTrig) {
      c.reference = Reference::exp_trig();
    } else {
      c.reference = Reference::figure_eight();
    }
  }

  if (j.contains("initial")) {
    const json& in = j.at("initial");
    detail::maybe_vec3(in, "q", c.initial.cable_dir);
    c.initial.cable_dir = project_unit(c.initial.cable_dir);
    detail::maybe(in, "L", c.initial.cable_len);
    detail::maybe(in, "L_dot", c.initial.cable_len_rate);
    detail::maybe_vec3(in, "v_L", c.initial.payload_vel);
    detail::maybe_vec3(in, "omega", c.initial.cable_omega);
    detail::maybe_vec3(in, "Omega", c.initial.body_rate);
    if (in.contains("R")) {
      const json& rj = in.at("R");
      if (!rj.is_array() || rj.size() != 9) throw ConfigError("initial.R: expected 9 numbers");
      Mat3 m;
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) m(r, col) = rj[3 * r + col].get<double>();
      c.initial.attitude = m;
    }
    if (in.contains("x_L") && in.contains("x_Q")) {
      throw ConfigError("initial: give either x_L or x_Q, not both");
    }
    if (in.contains("x_Q")) {
      // Payload position derived from the vehicle position: x_L = x_Q + L q.
      const Vec3 x_q = detail::vec3_from(in.at("x_Q"), "initial.x_Q");
      c.initial.payload_pos = x_q + c.initial.cable_len * c.initial.cable_dir;
      c.initial_from_vehicle = true;
    } else if (in.contains("x_L")) {
      c.initial.payload_pos = detail::vec3_from(in.at("x_L"), "initial.x_L");
    } else {
      throw ConfigError("initial: missing x_L or x_Q");
    }
    // Orthogonalize the cable rate against the (normalized) direction.
    c.initial.cable_omega -=
        c.initial.cable_dir.dot(c.initial.cable_omega) * c.initial.cable_dir;
    c.initial_chain << c.initial.cable_len, 0, 0, 0, 0;
    detail::maybe_vec5(in, "Lt", c.initial_chain);
    c.initial.validate();
  }

  if (j.contains("disturbance")) {
    DisturbanceSpec d;
    const json& dj = j.at("disturbance");
    detail::maybe(dj, "measurement_noise", d.measurement_noise);
    detail::maybe(dj, "parameter_mismatch", d.parameter_mismatch);
    detail::maybe(dj, "unmodeled", d.unmodeled);
    detail::maybe(dj, "impulse", d.impulse);
    detail::maybe(dj, "pos_noise_std", d.pos_noise_std);
    detail::maybe(dj, "vel_noise_std", d.vel_noise_std);
    detail::maybe(dj, "len_noise_std", d.len_noise_std);
    detail::maybe(dj, "len_rate_noise_std", d.len_rate_noise_std);
    detail::maybe(dj, "body_rate_noise_std", d.body_rate_noise_std);
    detail::maybe(dj, "dir_noise_rad", d.dir_noise_rad);
    detail::maybe(dj, "vehicle_mass_scale", d.vehicle_mass_scale);
    detail::maybe(dj, "payload_mass_scale", d.payload_mass_scale);
    detail::maybe_vec3(dj, "inertia_scale", d.inertia_scale);
    detail::maybe(dj, "actuator_lag", d.actuator_lag);
    detail::maybe_vec3(dj, "wind_accel_std", d.wind_accel_std);
    detail::maybe(dj, "impulse_time", d.impulse_time);
    detail::maybe(dj, "impulse_duration", d.impulse_duration);
    detail::maybe_vec3(dj, "impulse_amplitude", d.impulse_amplitude);
    d.validate();
    c.disturbance = d;
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    detail::maybe(r, "duration", c.duration);
    detail::maybe(r, "seed", c.seed);
    if (r.contains("mode")) {
      const std::string m = r.at("mode").get<std::string>();
      if (m == "full") {
        c.mode = RunMode::Full;
      } else if (m == "reduced") {
        c.mode = RunMode::ReducedAttitude;
      } else {
        throw ConfigError("run.mode: expected 'full' or 'reduced'");
      }
    }
  }
  if (!(c.duration > 0.0)) throw ConfigError("run.duration must be positive");

  if (!c.generator && !c.reference.has_cable()) {
    throw ConfigError(
        "scenario: reference supplies no cable-length chain and no generator is configured");
  }
  return c;
}

inline ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace liftline
