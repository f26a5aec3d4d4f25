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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "liftline/controller.hpp"
#include "liftline/dynamics.hpp"
#include "liftline/generator.hpp"
#include "liftline/inject.hpp"
#include "liftline/lyapunov.hpp"
#include "liftline/reference.hpp"
#include "liftline/rng.hpp"
#include "liftline/scenario.hpp"

namespace liftline {

inline constexpr double kPhysicsDt = 1e-3;   // plant integration step [s]
inline constexpr double kControlDt = 1e-2;   // controller / generator / log period [s]

/// One logged control step: true state, applied inputs, reference, errors
/// against the commanded setpoints, controller diagnostics and certification
/// quantities. The layout mirrors the CSV schema.
struct RunLogRow {
  double t = 0.0;
  // True plant state.
  Vec3 x_L, v_L, q, omega;
  double L = 0.0, L_dot = 0.0;
  Mat3 R;
  Vec3 Omega;
  Vec3 x_Q, v_Q;
  // Commanded inputs.
  double thrust = 0.0;
  Vec3 torque;
  double f_L = 0.0;
  // Reference sample.
  Vec3 x_Ld;
  double L_d = 0.0, Ld_dot = 0.0, Ld_ddot = 0.0;
  // True-state tracking errors.
  Vec3 e_x, e_v, e_q, e_omega, e_R, e_Omega;
  double e_L = 0.0, eL_dot = 0.0, psi_q = 0.0;
  // Commands and coupling diagnostics (controller's view).
  Vec3 F_L, q_d, omega_d, omega_d_dot, F_c, Omega_d, Omega_d_dot;
  Vec3 delta_L;
  double delta_bound = 0.0;
  Vec3 e_x_ctrl, e_v_ctrl;
  double eq_ctrl_norm = 0.0;
  // Certification quantities at this step.
  double V1v = 0.0, V2v = 0.0, V3v = 0.0;
  double barrier_len_margin = 0.0, barrier_dir_margin = 0.0;
  // Generator solve statistics (zero when no generator is configured).
  double gen_iterations = 0.0, gen_objective = 0.0, gen_violation = 0.0,
         gen_converged = 1.0;
};

struct AbortInfo {
  int step = -1;
  std::string reason;
};

struct RunLog {
  ScenarioConfig cfg;
  StabilityGains sg;        // selected before the run (a-priori rate bound)
  double gamma = 0.0;       // reference force bound for the growth check
  double c_omega_est = 0.0;
  std::string derivation_note;
  std::vector<RunLogRow> rows;
  std::vector<double> solve_ms;  // generator wall time; kept out of the CSV rows
  std::optional<AbortInfo> abort;
};

/// Reference force-magnitude bound over the run: sup |m_L xdd_des + m_L g e3|.
inline double reference_force_bound(const Reference& ref, const PhysicalParams& p,
                                    double duration) {
  double worst = 0.0;
  for (double t = 0.0; t <= duration; t += kPhysicsDt) {
    worst = std::max(worst, (p.payload_mass * ref.payload(t).d[2] +
                             p.payload_mass * p.gravity * e3())
                                .norm());
  }
  return worst;
}

/// A-priori bound on |(2I - q q^T) omega_d| from the reference-induced
/// command chain (zero tracking errors), with 20% headroom. The post-run
/// supremum is checked against this by the monitor.
inline double estimate_rate_bound(const Reference& ref, const Gains& g,
                                  const PhysicalParams& p, double duration) {
  double worst = 0.0;
  for (double t = 0.0; t <= duration; t += kControlDt) {
    const PayloadRef pr = ref.payload(t);
    try {
      const auto pc = position_control(Vec3::Zero(), Vec3::Zero(), -e3(), pr, g, p);
      const auto der = command_derivatives(Vec3::Zero(), Vec3::Zero(), pc.F_L, pc.q_d,
                                           Vec3::Zero(), pr, g, p);
      // omega_d is orthogonal to q_d, so the bound reduces to 2 |omega_d|.
      worst = std::max(worst, 2.0 * der.omega_d.norm());
    } catch (const DegenerateForce&) {
      continue;
    }
  }
  return 1.2 * worst;
}

/// Deterministic closed-loop run: physics at 1 kHz, controller and generator
/// at 100 Hz with zero-order hold, one log row per control step. Barrier or
/// degeneracy errors abort the run with the offending step recorded.
inline RunLog run(const ScenarioConfig& cfg) {
  RunLog log;
  log.cfg = cfg;
  cfg.params.validate();
  cfg.gains.validate();
  cfg.initial.validate();

  log.gamma = reference_force_bound(cfg.reference, cfg.params, cfg.duration);
  log.c_omega_est = estimate_rate_bound(cfg.reference, cfg.gains, cfg.params, cfg.duration);
  log.sg = select_stability_gains(cfg.gains, cfg.params, log.c_omega_est, log.gamma);
  if (cfg.initial_from_vehicle) {
    log.derivation_note = "initial payload position derived as x_L = x_Q + L q";
  }

  const bool reduced = cfg.mode == RunMode::ReducedAttitude;
  const DisturbanceSpec dist = cfg.disturbance.value_or(DisturbanceSpec{});
  const bool disturbed = cfg.disturbance.has_value();
  const PhysicalParams plant_params =
      disturbed ? perturbed_params(cfg.params, dist) : cfg.params;

  Controller controller(cfg.gains, cfg.params, kControlDt);
  std::optional<Generator> generator;
  if (cfg.generator) {
    generator.emplace(*cfg.generator, cfg.gains, cfg.params, cfg.initial_chain);
  }
  CounterRng rng(cfg.seed);
  std::optional<ActuatorLag> lag;
  if (disturbed && dist.unmodeled) lag.emplace(dist.actuator_lag);

  SystemState state = cfg.initial;
  const int steps = static_cast<int>(std::round(cfg.duration / kControlDt));
  const int substeps = static_cast<int>(std::round(kControlDt / kPhysicsDt));
  log.rows.reserve(steps);

  for (int k = 0; k < steps; ++k) {
    const double t = k * kControlDt;
    const SystemState measured =
        (disturbed && dist.measurement_noise) ? measure(state, dist, rng) : state;

    ReferenceSample ref_sample;
    ref_sample.payload = cfg.reference.payload(t);
    RunLogRow row;
    SystemState conditioned = measured;
    try {
      if (generator) {
        const auto info = generator->step(measured, t, cfg.reference, kControlDt);
        ref_sample.cable = info.cable;
        row.gen_iterations = info.iterations;
        row.gen_objective = info.objective;
        row.gen_violation = info.max_violation;
        row.gen_converged = info.converged ? 1.0 : 0.0;
        log.solve_ms.push_back(info.solve_ms);
      } else {
        ref_sample.cable = cfg.reference.cable(t);
      }
    } catch (const Error& e) {
      log.abort = AbortInfo{k, std::string("generator: ") + e.what()};
      break;
    }

    // The true state is the arbiter of the barrier sets; a loud abort below
    // uses it. Noisy length measurements are clamped into the barrier domain
    // before the control evaluation so a sensor spike near the boundary
    // cannot flip the sign of the barrier feedback.
    if (disturbed && dist.measurement_noise) {
      const double lim = 0.99 * cfg.gains.len_err_max;
      const double e_meas = conditioned.cable_len - ref_sample.cable.d[0];
      if (e_meas > lim) conditioned.cable_len = ref_sample.cable.d[0] + lim;
      if (e_meas < -lim) conditioned.cable_len = ref_sample.cable.d[0] - lim;
    }
    {
      const double e_true = state.cable_len - ref_sample.cable.d[0];
      if (std::abs(e_true) >= cfg.gains.len_err_max) {
        log.abort = AbortInfo{k, "cable length error left the barrier set"};
        break;
      }
    }

    CommandState cmd;
    try {
      cmd = controller.step(conditioned, ref_sample);
    } catch (const Error& e) {
      log.abort = AbortInfo{k, e.what()};
      break;
    }

    if (reduced) {
      // Slow-manifold attitude: the vehicle frame follows the setpoint.
      state.attitude = cmd.R_d;
      state.body_rate = cmd.Omega_d;
    }

    // Log the true state against the commanded setpoints.
    row.t = t;
    row.x_L = state.payload_pos;
    row.v_L = state.payload_vel;
    row.q = state.cable_dir;
    row.omega = state.cable_omega;
    row.L = state.cable_len;
    row.L_dot = state.cable_len_rate;
    row.R = state.attitude;
    row.Omega = state.body_rate;
    const auto veh = quad_from_payload(state);
    row.x_Q = veh.pos;
    row.v_Q = veh.vel;
    row.thrust = cmd.thrust;
    row.torque = cmd.torque;
    row.f_L = cmd.f_L;
    row.x_Ld = ref_sample.payload.d[0];
    row.L_d = ref_sample.cable.d[0];
    row.Ld_dot = ref_sample.cable.d[1];
    row.Ld_ddot = ref_sample.cable.d[2];
    row.e_x = state.payload_pos - ref_sample.payload.d[0];
    row.e_v = state.payload_vel - ref_sample.payload.d[1];
    const S2Error s2 = s2_error(cmd.q_d, state.cable_dir);
    row.e_q = s2.e_q;
    row.psi_q = s2.psi;
    row.e_omega = state.cable_omega +
                  state.cable_dir.cross(state.cable_dir.cross(cmd.omega_d));
    if (reduced) {
      row.e_R = Vec3::Zero();
      row.e_Omega = Vec3::Zero();
    } else {
      const SO3Error so3 = so3_error(cmd.R_d, state.attitude, cmd.Omega_d, state.body_rate);
      row.e_R = so3.e_R;
      row.e_Omega = so3.e_Omega;
    }
    row.e_L = state.cable_len - ref_sample.cable.d[0];
    row.eL_dot = state.cable_len_rate - ref_sample.cable.d[1];
    row.F_L = cmd.F_L;
    row.q_d = cmd.q_d;
    row.omega_d = cmd.omega_d;
    row.omega_d_dot = cmd.omega_d_dot;
    row.F_c = cmd.F_c;
    row.Omega_d = cmd.Omega_d;
    row.Omega_d_dot = cmd.Omega_d_dot;
    row.delta_L = cmd.delta_L;
    row.delta_bound = cmd.delta_bound;
    row.e_x_ctrl = cmd.e_x;
    row.e_v_ctrl = cmd.e_v;
    row.eq_ctrl_norm = cmd.e_q.norm();
    row.V1v = V1(row.e_x, row.e_v, cfg.gains, cfg.params.payload_mass);
    row.barrier_len_margin =
        cfg.gains.len_err_max * cfg.gains.len_err_max - row.e_L * row.e_L;
    row.barrier_dir_margin = cfg.gains.dir_err_max_sq - row.psi_q;
    row.V2v = row.barrier_len_margin > 0.0
                  ? V2(row.e_L, row.eL_dot, log.sg, cfg.gains, cfg.params.vehicle_mass)
                  : std::numeric_limits<double>::infinity();
    row.V3v = row.barrier_dir_margin > 0.0
                  ? V3(row.e_q, row.e_omega, row.psi_q, log.sg, cfg.gains)
                  : std::numeric_limits<double>::infinity();
    log.rows.push_back(row);

    // Advance the plant under zero-order-held commands.
    try {
      if (reduced) {
        const ReducedInput ru{cmd.F_c, cmd.f_L};
        for (int i = 0; i < substeps; ++i) {
          const double ts = t + i * kPhysicsDt;
          Vec3 a_ext = Vec3::Zero();
          if (disturbed) {
            a_ext = impulse_force(ts, dist) / plant_params.payload_mass;
          }
          state = step_reduced(state, ru, plant_params, kPhysicsDt, a_ext);
        }
      } else {
        const ControlInput u = controller.input(cmd);
        const Vec3 wind = disturbed ? sample_wind(dist, rng) : Vec3::Zero();
        for (int i = 0; i < substeps; ++i) {
          const double ts = t + i * kPhysicsDt;
          Vec3 a_ext = wind;
          if (disturbed) {
            a_ext += impulse_force(ts, dist) / plant_params.payload_mass;
          }
          const ControlInput applied = lag ? lag->apply(u, kPhysicsDt) : u;
          state = step(state, applied, plant_params, kPhysicsDt, a_ext);
        }
      }
    } catch (const Error& e) {
      log.abort = AbortInfo{k, e.what()};
      break;
    }
  }
  return log;
}

}  // namespace liftline
