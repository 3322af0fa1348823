#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pfmpc/baseline.hpp"
#include "pfmpc/config.hpp"
#include "pfmpc/mpc.hpp"
#include "pfmpc/scenario.hpp"
#include "pfmpc/simulator.hpp"

namespace pfmpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;   // missing/malformed scenario or config
inline constexpr int kExitAborted = 3;    // controller threw mid-run

inline const std::vector<std::string>& all_variants() {
  static const std::vector<std::string> v{"tracking-pid", "mpc", "mpc-pf"};
  return v;
}

inline bool is_variant(const std::string& name) {
  const auto& v = all_variants();
  return std::find(v.begin(), v.end(), name) != v.end();
}

// One controller closure per run; MPC variants differ only in gains, so the
// ablation axis lives entirely in configuration.
inline ControllerFn make_controller(const std::string& variant, const Config& cfg,
                                    double target_speed) {
  if (variant == "tracking-pid") {
    auto ctrl = std::make_shared<TrackingPidController>(cfg.vehicle, cfg.baseline, cfg.gates,
                                                        cfg.pf.corridor_extra);
    ctrl->set_target_speed(target_speed);
    return [ctrl](const VehicleState& ego, const PlannerOutput& planner) {
      return ctrl->cycle(ego, planner);
    };
  }
  PFGains gains = cfg.pf;
  if (variant == "mpc") {
    gains.k_base = 0.0;  // tracking-only ablation: no obstacle or ACC term
    gains.k_c = 0.0;
  } else if (variant != "mpc-pf") {
    throw std::runtime_error("unknown controller variant: " + variant);
  }
  auto ctrl = std::make_shared<MpcController>(cfg.vehicle, gains, cfg.mpc, cfg.gates);
  ctrl->set_target_speed(target_speed);
  return [ctrl](const VehicleState& ego, const PlannerOutput& planner) {
    return ctrl->cycle(ego, planner);
  };
}

// Library-level single run used by the CLI and the regression tests.
inline SimResult run_scenario(const ScenarioSpec& scenario, const std::string& variant,
                              const Config& cfg, std::uint64_t seed) {
  const double target =
      scenario.target_speed >= 0.0 ? scenario.target_speed : cfg.mpc.target_speed;
  const ControllerFn controller = make_controller(variant, cfg, target);
  return run(scenario, controller, cfg.vehicle, cfg.pf, cfg.infractions, seed,
             cfg.sim.deadlock_speed, cfg.sim.deadlock_time);
}

inline nlohmann::json metrics_to_json(const ScenarioSpec& scenario, const std::string& variant,
                                      const SimMetrics& m, bool include_wall_time) {
  nlohmann::json j;
  j["scenario"] = scenario.name;
  j["controller"] = variant;
  j["seed"] = m.seed;
  j["route_completion"] = m.route_completion;
  j["infraction_score"] = m.infraction_score;
  j["driving_score"] = m.driving_score;
  j["completed"] = m.completed;
  j["deadlock"] = m.deadlock;
  j["invalid"] = m.invalid;
  if (m.invalid) j["error"] = m.error;
  j["duration"] = m.duration;
  if (include_wall_time) j["wall_time_ms"] = m.wall_time_ms;

  j["events"] = nlohmann::json::array();
  for (const InfractionEvent& e : m.events)
    j["events"].push_back({{"type", e.type}, {"time", e.time}, {"x", e.x}, {"y", e.y},
                           {"agent", e.agent}});

  if (std::isfinite(m.min_obstacle_distance))
    j["min_obstacle_distance"] = m.min_obstacle_distance;
  else
    j["min_obstacle_distance"] = nullptr;

  j["min_distance_per_agent"] = nlohmann::json::array();
  for (std::size_t i = 0; i < m.min_distance_per_agent.size(); ++i) {
    const double dist = m.min_distance_per_agent[i];
    j["min_distance_per_agent"].push_back(
        {{"agent", scenario.agents[i].name},
         {"distance", std::isfinite(dist) ? nlohmann::json(dist) : nlohmann::json(nullptr)}});
  }
  return j;
}

struct RunRecord {
  std::string scenario;
  std::string variant;
  SimMetrics metrics;
};

namespace detail {

inline std::vector<std::filesystem::path> collect_scenarios(const std::string& scenario_path,
                                                            const std::string& suite_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (!scenario_path.empty()) {
    files.emplace_back(scenario_path);
  } else {
    if (!fs::is_directory(suite_dir))
      throw std::runtime_error("suite directory not found: " + suite_dir);
    for (const auto& entry : fs::directory_iterator(suite_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    if (files.empty()) throw std::runtime_error("no .json scenarios in: " + suite_dir);
  }
  return files;
}

inline Config load_config_or_default(const std::string& config_path) {
  if (config_path.empty()) return Config{};
  return load_config(config_path);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << text;
}

// Runs one (scenario, variant) pair and writes <name>_<variant>.csv and
// <name>_<variant>.metrics.json under out_dir.
inline RunRecord execute_one(const ScenarioSpec& scenario, const std::string& variant,
                             const Config& cfg, std::uint64_t seed,
                             const std::filesystem::path& out_dir, bool no_timestamps) {
  const SimResult result = run_scenario(scenario, variant, cfg, seed);
  const std::string stem = scenario.name + "_" + variant;
  write_text(out_dir / (stem + ".csv"), trajectory_csv(result.log));
  write_text(out_dir / (stem + ".metrics.json"),
             metrics_to_json(scenario, variant, result.metrics, !no_timestamps).dump(2) + "\n");
  return {scenario.name, variant, result.metrics};
}

inline void print_run_table(const std::vector<RunRecord>& records, std::ostream& out) {
  out << "scenario                  controller    RC      IS      DS      events  flags\n";
  for (const RunRecord& r : records) {
    char line[256];
    std::string flags;
    if (r.metrics.deadlock) flags += "deadlock ";
    if (r.metrics.invalid) flags += "invalid ";
    if (flags.empty()) flags = "-";
    else flags.pop_back();
    std::snprintf(line, sizeof(line), "%-25s %-13s %.4f  %.4f  %.4f  %-6zu  %s\n",
                  r.scenario.c_str(), r.variant.c_str(), r.metrics.route_completion,
                  r.metrics.infraction_score, r.metrics.driving_score, r.metrics.events.size(),
                  flags.c_str());
    out << line;
  }
}

}  // namespace detail

struct RunOptions {
  std::string scenario_path;  // one of scenario_path / suite_dir must be set
  std::string suite_dir;
  std::string variant = "mpc-pf";
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool no_timestamps = false;
};

inline int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  try {
    if (!is_variant(opt.variant)) {
      err << "error: unknown controller variant '" << opt.variant << "'\n";
      return kExitBadInput;
    }
    const Config cfg = detail::load_config_or_default(opt.config_path);
    const auto files = detail::collect_scenarios(opt.scenario_path, opt.suite_dir);
    fs::create_directories(opt.out_dir);

    std::vector<RunRecord> records;
    bool aborted = false;
    for (const fs::path& f : files) {
      const ScenarioSpec scenario = load_scenario(f.string());
      records.push_back(
          detail::execute_one(scenario, opt.variant, cfg, opt.seed, opt.out_dir,
                              opt.no_timestamps));
      if (records.back().metrics.invalid) {
        aborted = true;
        err << "error: run aborted in scenario '" << scenario.name
            << "': " << records.back().metrics.error << "\n";
      }
    }
    std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
      return a.scenario < b.scenario;
    });
    detail::print_run_table(records, out);
    return aborted ? kExitAborted : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
}

struct CompareOptions {
  std::string scenario_path;
  std::string suite_dir;
  std::vector<std::string> variants;  // empty → all three
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool no_timestamps = false;
};

inline int compare_command(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  try {
    std::vector<std::string> variants = opt.variants.empty() ? all_variants() : opt.variants;
    for (const std::string& v : variants)
      if (!is_variant(v)) {
        err << "error: unknown controller variant '" << v << "'\n";
        return kExitBadInput;
      }
    const Config cfg = detail::load_config_or_default(opt.config_path);
    const auto files = detail::collect_scenarios(opt.scenario_path, opt.suite_dir);
    fs::create_directories(opt.out_dir);

    std::vector<ScenarioSpec> scenarios;
    for (const fs::path& f : files) scenarios.push_back(load_scenario(f.string()));
    std::sort(scenarios.begin(), scenarios.end(),
              [](const ScenarioSpec& a, const ScenarioSpec& b) { return a.name < b.name; });

    bool aborted = false;
    std::vector<RunRecord> records;
    out << "controller     mean_RC  mean_IS  mean_DS  runs\n";
    for (const std::string& variant : variants) {
      double rc = 0.0, is = 0.0, ds = 0.0;
      for (const ScenarioSpec& scenario : scenarios) {
        records.push_back(detail::execute_one(scenario, variant, cfg, opt.seed, opt.out_dir,
                                              opt.no_timestamps));
        const SimMetrics& m = records.back().metrics;
        if (m.invalid) {
          aborted = true;
          err << "error: run aborted in scenario '" << scenario.name << "' (" << variant
              << "): " << m.error << "\n";
        }
        rc += m.route_completion;
        is += m.infraction_score;
        ds += m.driving_score;
      }
      const double n = static_cast<double>(scenarios.size());
      char line[160];
      std::snprintf(line, sizeof(line), "%-14s %.4f   %.4f   %.4f   %zu\n", variant.c_str(),
                    rc / n, is / n, ds / n, scenarios.size());
      out << line;
    }
    out << "\n";
    detail::print_run_table(records, out);
    return aborted ? kExitAborted : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
}

}  // namespace pfmpc::cli
