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
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "liftline/metrics.hpp"
#include "liftline/monitor.hpp"
#include "liftline/simulate.hpp"

namespace liftline {

// One row per control step; floats serialized as shortest round-trip
// decimals, so identical configs and seeds produce byte-identical files.

namespace detail {

template <typename F>
void visit_row_fields(RunLogRow& r, F&& f) {
  auto v3 = [&](const std::string& n, Vec3& v) {
    f(n + "_x", v.x());
    f(n + "_y", v.y());
    f(n + "_z", v.z());
  };
  f("t", r.t);
  v3("x_L", r.x_L);
  v3("v_L", r.v_L);
  v3("q", r.q);
  v3("omega", r.omega);
  f("L", r.L);
  f("L_dot", r.L_dot);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      f("R_" + std::to_string(i) + std::to_string(j), r.R(i, j));
    }
  }
  v3("Omega", r.Omega);
  v3("x_Q", r.x_Q);
  v3("v_Q", r.v_Q);
  f("thrust", r.thrust);
  v3("tau", r.torque);
  f("f_L", r.f_L);
  v3("x_Ld", r.x_Ld);
  f("L_d", r.L_d);
  f("Ld_dot", r.Ld_dot);
  f("Ld_ddot", r.Ld_ddot);
  v3("e_x", r.e_x);
  v3("e_v", r.e_v);
  v3("e_q", r.e_q);
  v3("e_w", r.e_omega);
  v3("e_R", r.e_R);
  v3("e_Om", r.e_Omega);
  f("e_L", r.e_L);
  f("eL_dot", r.eL_dot);
  f("psi_q", r.psi_q);
  v3("F_L", r.F_L);
  v3("q_d", r.q_d);
  v3("omega_d", r.omega_d);
  v3("omega_d_dot", r.omega_d_dot);
  v3("F_c", r.F_c);
  v3("Omega_d", r.Omega_d);
  v3("Omega_d_dot", r.Omega_d_dot);
  v3("delta_L", r.delta_L);
  f("delta_bound", r.delta_bound);
  v3("e_x_ctrl", r.e_x_ctrl);
  v3("e_v_ctrl", r.e_v_ctrl);
  f("eq_ctrl_norm", r.eq_ctrl_norm);
  f("V1", r.V1v);
  f("V2", r.V2v);
  f("V3", r.V3v);
  f("barrier_len_margin", r.barrier_len_margin);
  f("barrier_dir_margin", r.barrier_dir_margin);
  f("gen_iters", r.gen_iterations);
  f("gen_objective", r.gen_objective);
  f("gen_violation", r.gen_violation);
  f("gen_converged", r.gen_converged);
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc()) {
    // from_chars does not accept "inf"/"nan" spellings produced by to_chars.
    if (s.find("inf") != std::string::npos) {
      return s.find('-') != std::string::npos
                 ? -std::numeric_limits<double>::infinity()
                 : std::numeric_limits<double>::infinity();
    }
    if (s.find("nan") != std::string::npos) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError("runlog: cannot parse number '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline std::vector<std::string> runlog_columns() {
  std::vector<std::string> names;
  RunLogRow dummy;
  detail::visit_row_fields(dummy, [&](const std::string& n, double&) { names.push_back(n); });
  return names;
}

inline void write_runlog(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open runlog for writing: " + path);
  out << "# liftline runlog v1\n";
  out << "# config: " << log.cfg.raw.dump() << "\n";
  nlohmann::json stab{{"c_omega_est", log.c_omega_est},
                      {"gamma", log.gamma},
                      {"alpha_len", log.sg.alpha_len},
                      {"alpha_dir", log.sg.alpha_dir},
                      {"beta_len", log.sg.beta_len},
                      {"beta_dir", log.sg.beta_dir}};
  out << "# stability: " << stab.dump() << "\n";
  if (!log.derivation_note.empty()) out << "# note: " << log.derivation_note << "\n";
  if (log.abort) {
    nlohmann::json a{{"step", log.abort->step}, {"reason", log.abort->reason}};
    out << "# abort: " << a.dump() << "\n";
  }
  const auto cols = runlog_columns();
  for (size_t i = 0; i < cols.size(); ++i) {
    out << cols[i] << (i + 1 < cols.size() ? "," : "\n");
  }
  for (const auto& row : log.rows) {
    RunLogRow r = row;
    bool first = true;
    detail::visit_row_fields(r, [&](const std::string&, double& v) {
      if (!first) out << ',';
      out << detail::format_double(v);
      first = false;
    });
    out << '\n';
  }
}

inline RunLog read_runlog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open runlog: " + path);
  RunLog log;
  std::string line;
  bool have_config = false;
  bool have_header = false;
  double c_omega_est = 0.0, gamma = 0.0;
  size_t ncols = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto parse_tail = [&](const char* tag) -> std::string {
        const std::string t = std::string("# ") + tag + ": ";
        if (line.rfind(t, 0) == 0) return line.substr(t.size());
        return {};
      };
      if (auto s = parse_tail("config"); !s.empty()) {
        log.cfg = ScenarioConfig::from_json(nlohmann::json::parse(s));
        have_config = true;
      } else if (auto s2 = parse_tail("stability"); !s2.empty()) {
        const auto j = nlohmann::json::parse(s2);
        c_omega_est = j.value("c_omega_est", 0.0);
        gamma = j.value("gamma", 0.0);
      } else if (auto s3 = parse_tail("note"); !s3.empty()) {
        log.derivation_note = s3;
      } else if (auto s4 = parse_tail("abort"); !s4.empty()) {
        const auto j = nlohmann::json::parse(s4);
        log.abort = AbortInfo{j.value("step", -1), j.value("reason", std::string())};
      }
      continue;
    }
    if (!have_header) {
      ncols = static_cast<size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      const auto expected = runlog_columns();
      if (ncols != expected.size()) {
        throw ConfigError("runlog: column count mismatch (file has " +
                          std::to_string(ncols) + ", expected " +
                          std::to_string(expected.size()) + ")");
      }
      have_header = true;
      continue;
    }
    RunLogRow row;
    size_t start = 0;
    std::vector<double> vals;
    vals.reserve(ncols);
    while (start <= line.size()) {
      const size_t comma = line.find(',', start);
      const size_t end = comma == std::string::npos ? line.size() : comma;
      vals.push_back(detail::parse_double(line.substr(start, end - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (vals.size() != ncols) throw ConfigError("runlog: bad row width");
    size_t idx = 0;
    detail::visit_row_fields(row, [&](const std::string&, double& v) { v = vals[idx++]; });
    log.rows.push_back(row);
  }
  if (!have_config) throw ConfigError("runlog: missing '# config:' header line");
  log.c_omega_est = c_omega_est;
  log.gamma = gamma;
  log.sg = select_stability_gains(log.cfg.gains, log.cfg.params, c_omega_est, gamma);
  return log;
}

inline void write_monitor_csv(const MonitorReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open monitor csv for writing: " + path);
  out << "# liftline monitor v1\n";
  out << "# summary: " << rep.to_json().dump() << "\n";
  out << "t,V1,V2,V3,barrier_len_margin,barrier_dir_margin,coupling_margin,"
         "growth_margin,appendix_margin,config_identity_err,v1_identity_resid,"
         "v1_identity_margin,v2_decay_margin,v3_decay_margin,v2_envelope_margin,"
         "v3_envelope_margin\n";
  for (const auto& m : rep.rows) {
    const double vals[] = {m.t,
                           m.V1v,
                           m.V2v,
                           m.V3v,
                           m.barrier_len_margin,
                           m.barrier_dir_margin,
                           m.coupling_margin,
                           m.growth_margin,
                           m.appendix_margin,
                           m.config_identity_err,
                           m.v1_identity_resid,
                           m.v1_identity_margin,
                           m.v2_decay_margin,
                           m.v3_decay_margin,
                           m.v2_envelope_margin,
                           m.v3_envelope_margin};
    for (size_t i = 0; i < std::size(vals); ++i) {
      out << detail::format_double(vals[i]) << (i + 1 < std::size(vals) ? "," : "\n");
    }
  }
}

inline nlohmann::json summary_json(const RunLog& log, const MetricsReport& met,
                                   const MonitorReport& mon) {
  nlohmann::json j{{"name", log.cfg.name},
                   {"mode", log.cfg.mode == RunMode::Full ? "full" : "reduced"},
                   {"seed", log.cfg.seed},
                   {"duration", log.cfg.duration},
                   {"steps", log.rows.size()},
                   {"metrics", met.to_json()},
                   {"certification", mon.to_json()},
                   {"stability",
                    {{"alpha_len", log.sg.alpha_len},
                     {"alpha_dir", log.sg.alpha_dir},
                     {"beta_len", log.sg.beta_len},
                     {"beta_dir", log.sg.beta_dir},
                     {"c_omega_est", log.c_omega_est},
                     {"gamma", log.gamma}}}};
  if (log.abort) {
    j["abort"] = {{"step", log.abort->step}, {"reason", log.abort->reason}};
  } else {
    j["abort"] = nullptr;
  }
  return j;
}

inline void write_summary(const RunLog& log, const MetricsReport& met,
                          const MonitorReport& mon, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open summary for writing: " + path);
  out << summary_json(log, met, mon).dump(2) << "\n";
}

}  // namespace liftline
