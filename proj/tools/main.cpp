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

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "liftline/log_io.hpp"
#include "liftline/metrics.hpp"
#include "liftline/monitor.hpp"
#include "liftline/simulate.hpp"

namespace fs = std::filesystem;
using namespace liftline;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAssert = 2;

int run_one(ScenarioConfig cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const RunLog log = run(cfg);
  const MetricsReport met = metrics(log);
  const MonitorReport mon = certify_trajectory(log);
  write_runlog(log, (out_dir / "runlog.csv").string());
  write_monitor_csv(mon, (out_dir / "monitor.csv").string());
  write_summary(log, met, mon, (out_dir / "summary.json").string());
  std::cout << "wrote " << (out_dir / "runlog.csv").string() << " ("
            << log.rows.size() << " steps)\n";
  if (log.abort) {
    std::cerr << "run aborted at step " << log.abort->step << " (t="
              << log.abort->step * kControlDt << " s): " << log.abort->reason << "\n";
    return kExitAssert;
  }
  if (!mon.passed) {
    for (const auto& c : mon.checks) {
      if (c.asserted && !c.passed) {
        std::cerr << "certification failed: " << c.name << " worst " << c.worst
                  << " at t=" << c.worst_time << " s\n";
      }
    }
    return kExitAssert;
  }
  return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::string& out,
            const std::string& mode) {
  ScenarioConfig cfg = ScenarioConfig::from_file(scenario_path);
  if (!mode.empty()) {
    if (mode == "full") {
      cfg.mode = RunMode::Full;
    } else if (mode == "reduced") {
      cfg.mode = RunMode::ReducedAttitude;
    } else {
      throw ConfigError("--mode must be 'full' or 'reduced'");
    }
    cfg.raw["run"]["mode"] = mode;
  }
  return run_one(cfg, out);
}

int cmd_certify(const std::string& runlog_path, const std::string& out_csv,
                const std::string& out_json) {
  const RunLog log = read_runlog(runlog_path);
  const MonitorReport mon = certify_trajectory(log);
  if (!out_csv.empty()) write_monitor_csv(mon, out_csv);
  if (!out_json.empty()) {
    std::ofstream f(out_json);
    f << mon.to_json().dump(2) << "\n";
  }
  std::cout << mon.to_json().dump(2) << "\n";
  if (!mon.passed) {
    for (const auto& c : mon.checks) {
      if (c.asserted && !c.passed) {
        std::cerr << "violation: " << c.name << " worst " << c.worst << " at t="
                  << c.worst_time << " s\n";
      }
    }
    if (log.abort) {
      std::cerr << "run was aborted at step " << log.abort->step << ": "
                << log.abort->reason << "\n";
    }
    return kExitAssert;
  }
  return kExitOk;
}

int cmd_metrics(const std::string& runlog_path, double window) {
  const RunLog log = read_runlog(runlog_path);
  std::cout << metrics(log, window).to_json().dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& which, const std::string& scenario_dir,
              const std::string& out) {
  int rc = kExitOk;
  if (which == "sim1") {
    for (const char* name : {"sim1_test1", "sim1_test2", "sim1_test3"}) {
      ScenarioConfig cfg =
          ScenarioConfig::from_file(scenario_dir + "/" + name + ".json");
      std::cout << "== " << name << "\n";
      rc = std::max(rc, run_one(cfg, fs::path(out) / name));
    }
  } else if (which == "sim2") {
    for (const char* name : {"sim2_test1", "sim2_test2"}) {
      for (double k9 : {100.0, 10.0, 0.1, 0.0}) {
        nlohmann::json j;
        {
          std::ifstream f(scenario_dir + "/" + name + ".json");
          if (!f) throw ConfigError(std::string("cannot open scenario ") + name);
          f >> j;
        }
        j["generator"]["k9"] = k9;
        std::string tag = std::to_string(k9);
        tag.erase(tag.find_last_not_of('0') + 1);
        if (!tag.empty() && tag.back() == '.') tag.pop_back();
        j["name"] = std::string(name) + "_k9_" + tag;
        ScenarioConfig cfg = ScenarioConfig::from_json(j);
        std::cout << "== " << cfg.name << "\n";
        rc = std::max(rc, run_one(cfg, fs::path(out) / cfg.name));
      }
    }
  } else {
    throw ConfigError("sweep: expected 'sim1' or 'sim2'");
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable-length-cable aerial transport: simulation, control and certification"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", mode;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario file");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--mode", mode, "override run mode: full|reduced");

  std::string runlog_path, monitor_csv = "monitor.csv", monitor_json;
  auto* certify_cmd = app.add_subcommand("certify", "re-check inequalities on a runlog");
  certify_cmd->add_option("runlog", runlog_path, "runlog.csv produced by run")->required();
  certify_cmd->add_option("--out", monitor_csv, "per-step margins CSV");
  certify_cmd->add_option("--json", monitor_json, "summary JSON path");

  std::string metrics_path;
  double window = 20.0;
  auto* metrics_cmd = app.add_subcommand("metrics", "tracking metrics from a runlog");
  metrics_cmd->add_option("runlog", metrics_path, "runlog.csv produced by run")->required();
  metrics_cmd->add_option("--window", window, "RMSE/mean window in seconds");

  std::string sweep_which, sweep_dir = "scenarios", sweep_out = "sweep_out";
  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario family");
  sweep_cmd->add_option("family", sweep_which, "sim1 (weight tests) or sim2 (altitude-weight grid)")
      ->required();
  sweep_cmd->add_option("--scenario-dir", sweep_dir, "directory with scenario files");
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(scenario_path, out_dir, mode);
    if (certify_cmd->parsed()) return cmd_certify(runlog_path, monitor_csv, monitor_json);
    if (metrics_cmd->parsed()) return cmd_metrics(metrics_path, window);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_which, sweep_dir, sweep_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssert;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
