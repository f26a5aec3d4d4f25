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
#include <functional>
#include <json.hpp>
#include <optional>

#include "liftline/simulate.hpp"

namespace liftline {

struct MetricTolerances {
  double e_x = 0.05;   // [m]
  double e_q = 0.02;
  double e_R = 0.02;
  double e_L = 0.01;   // [m]
  double hold = 10.0;  // [s] dwell required inside the tolerance
};

struct SignalMetrics {
  double rmse = 0.0;
  double mean = 0.0;
  std::optional<double> t_conv;  // absent when the signal never settles
};

struct MetricsReport {
  SignalMetrics e_x, e_q, e_R, e_L;
  double window = 20.0;
  MetricTolerances tol;
  // Generator solve statistics (zero when no generator ran).
  double solve_mean_ms = 0.0, solve_max_ms = 0.0, solve_std_ms = 0.0;
  int steps = 0;

  nlohmann::json to_json() const {
    auto sig = [](const SignalMetrics& s) {
      nlohmann::json j{{"rmse", s.rmse}, {"mean", s.mean}};
      if (s.t_conv) {
        j["t_conv"] = *s.t_conv;
      } else {
        j["t_conv"] = nullptr;
      }
      return j;
    };
    return nlohmann::json{
        {"window", window},
        {"e_x", sig(e_x)},
        {"e_q", sig(e_q)},
        {"e_R", sig(e_R)},
        {"e_L", sig(e_L)},
        {"solver",
         {{"mean_ms", solve_mean_ms}, {"max_ms", solve_max_ms}, {"std_ms", solve_std_ms}}},
        {"steps", steps}};
  }
};

namespace detail {

inline SignalMetrics signal_metrics(const RunLog& log,
                                    const std::function<double(const RunLogRow&)>& f,
                                    double window, double tol, double hold) {
  SignalMetrics m;
  if (log.rows.empty()) return m;
  double sq = 0.0, ab = 0.0;
  int n = 0;
  for (const auto& r : log.rows) {
    if (r.t > window + 1e-12) break;
    const double v = f(r);
    sq += v * v;
    ab += std::abs(v);
    ++n;
  }
  if (n > 0) {
    m.rmse = std::sqrt(sq / n);
    m.mean = ab / n;
  }
  // First instant after which the signal stays inside the tolerance for the
  // full hold window.
  const double t_last = log.rows.back().t;
  size_t hold_start = 0;
  bool holding = false;
  for (size_t i = 0; i < log.rows.size(); ++i) {
    if (std::abs(f(log.rows[i])) <= tol) {
      if (!holding) {
        holding = true;
        hold_start = i;
      }
      if (log.rows[i].t - log.rows[hold_start].t >= hold - 1e-9) {
        m.t_conv = log.rows[hold_start].t;
        return m;
      }
    } else {
      holding = false;
    }
  }
  // A dwell that reaches the end of the log counts only if the log is long
  // enough to contain the full hold window.
  if (holding && t_last - log.rows[hold_start].t >= hold - 1e-9) {
    m.t_conv = log.rows[hold_start].t;
  }
  return m;
}

}  // namespace detail

inline MetricsReport metrics(const RunLog& log, double window = 20.0,
                             const MetricTolerances& tol = MetricTolerances{}) {
  MetricsReport rep;
  rep.window = window;
  rep.tol = tol;
  rep.steps = static_cast<int>(log.rows.size());
  rep.e_x = detail::signal_metrics(
      log, [](const RunLogRow& r) { return r.e_x.norm(); }, window, tol.e_x, tol.hold);
  rep.e_q = detail::signal_metrics(
      log, [](const RunLogRow& r) { return r.e_q.norm(); }, window, tol.e_q, tol.hold);
  rep.e_R = detail::signal_metrics(
      log, [](const RunLogRow& r) { return r.e_R.norm(); }, window, tol.e_R, tol.hold);
  rep.e_L = detail::signal_metrics(
      log, [](const RunLogRow& r) { return r.e_L; }, window, tol.e_L, tol.hold);
  if (!log.solve_ms.empty()) {
    double sum = 0.0, mx = 0.0;
    for (double v : log.solve_ms) {
      sum += v;
      mx = std::max(mx, v);
    }
    const double mean = sum / log.solve_ms.size();
    double var = 0.0;
    for (double v : log.solve_ms) var += (v - mean) * (v - mean);
    rep.solve_mean_ms = mean;
    rep.solve_max_ms = mx;
    rep.solve_std_ms = std::sqrt(var / log.solve_ms.size());
  }
  return rep;
}

}  // namespace liftline
