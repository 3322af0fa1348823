#pragma once

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfmpc/baseline.hpp"
#include "pfmpc/mpc.hpp"
#include "pfmpc/potential_field.hpp"
#include "pfmpc/reference.hpp"
#include "pfmpc/simulator.hpp"
#include "pfmpc/vehicle.hpp"

namespace pfmpc {

// Runtime knobs not owned by any controller struct.
struct SimOptions {
  double deadlock_speed = 0.1;  // m/s
  double deadlock_time = 30.0;  // s
};

// Everything configurable in one place; defaults here are the library
// defaults, so an empty config file is valid.
struct Config {
  VehicleParams vehicle;
  PFGains pf;
  MPCConfig mpc;
  GateThresholds gates;
  BaselineConfig baseline;
  InfractionTable infractions;
  SimOptions sim;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number '" + v + "' for " + where);
  }
}

inline int parse_int(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return i;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer '" + v + "' for " + where);
  }
}

inline bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("config: bad boolean '" + v + "' for " + where);
}

inline std::vector<double> parse_vector(const std::string& v, std::size_t n,
                                        const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), where));
  if (out.size() != n) {
    std::ostringstream os;
    os << "config: " << where << " needs " << n << " comma-separated values, got " << out.size();
    throw std::runtime_error(os.str());
  }
  return out;
}

}  // namespace detail

// Minimal strict INI: [section] headers, key = value lines, '#'/';' comments,
// unknown sections or keys are errors.
inline std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::string& text) {
  std::map<std::string, std::map<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: malformed section header at line " +
                                 std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("config: empty section name at line " + std::to_string(lineno));
      out[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " + std::to_string(lineno));
    if (section.empty())
      throw std::runtime_error("config: key outside any section at line " +
                               std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
    out[section][key] = value;
  }
  return out;
}

inline Config parse_config(const std::string& text) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_vector;

  Config c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, std::map<std::string, Setter>> schema;

  const auto d = [](double* field) {
    return [field](const std::string& v, const std::string& w) { *field = parse_double(v, w); };
  };
  const auto i = [](int* field) {
    return [field](const std::string& v, const std::string& w) { *field = parse_int(v, w); };
  };
  const auto b = [](bool* field) {
    return [field](const std::string& v, const std::string& w) { *field = parse_bool(v, w); };
  };

  auto& vehicle = schema["vehicle"];
  vehicle["mass"] = d(&c.vehicle.mass);
  vehicle["lf"] = d(&c.vehicle.lf);
  vehicle["lr"] = d(&c.vehicle.lr);
  vehicle["kf"] = d(&c.vehicle.kf);
  vehicle["kr"] = d(&c.vehicle.kr);
  vehicle["iz"] = d(&c.vehicle.iz);
  vehicle["dt"] = d(&c.vehicle.dt);
  vehicle["width"] = d(&c.vehicle.width);
  vehicle["length"] = d(&c.vehicle.length);
  vehicle["vx_blend_low"] = d(&c.vehicle.vx_blend_low);
  vehicle["vx_blend_high"] = d(&c.vehicle.vx_blend_high);
  vehicle["u_min"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 2, w);
    c.vehicle.u_min = {vals[0], vals[1]};
  };
  vehicle["u_max"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 2, w);
    c.vehicle.u_max = {vals[0], vals[1]};
  };
  vehicle["x_min"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 6, w);
    for (int k = 0; k < 6; ++k) c.vehicle.x_min[k] = vals[static_cast<std::size_t>(k)];
  };
  vehicle["x_max"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 6, w);
    for (int k = 0; k < 6; ++k) c.vehicle.x_max[k] = vals[static_cast<std::size_t>(k)];
  };

  auto& pf = schema["pf"];
  pf["k_base"] = d(&c.pf.k_base);
  pf["k_c"] = d(&c.pf.k_c);
  pf["scale_vehicle"] = d(&c.pf.scale_vehicle);
  pf["scale_cyclist"] = d(&c.pf.scale_cyclist);
  pf["scale_pedestrian"] = d(&c.pf.scale_pedestrian);
  pf["scale_static"] = d(&c.pf.scale_static);
  pf["d_epsilon"] = d(&c.pf.d_epsilon);
  pf["nd2_floor"] = d(&c.pf.nd2_floor);
  pf["axis_len_scale"] = d(&c.pf.axis_len_scale);
  pf["axis_wid_scale"] = d(&c.pf.axis_wid_scale);
  pf["corridor_extra"] = d(&c.pf.corridor_extra);
  pf["printed_rotation"] = b(&c.pf.printed_rotation);
  pf["propagate_obstacles"] = b(&c.pf.propagate_obstacles);

  auto& mpc = schema["mpc"];
  mpc["horizon"] = i(&c.mpc.horizon);
  mpc["w_x"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 6, w);
    for (int k = 0; k < 6; ++k) c.mpc.w_x[k] = vals[static_cast<std::size_t>(k)];
  };
  mpc["w_du"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 2, w);
    c.mpc.w_du << vals[0], vals[1];
  };
  mpc["w_u"] = [&c](const std::string& v, const std::string& w) {
    const auto vals = parse_vector(v, 2, w);
    c.mpc.w_u << vals[0], vals[1];
  };
  mpc["max_iters"] = i(&c.mpc.max_iters);
  mpc["step_tolerance"] = d(&c.mpc.step_tolerance);
  mpc["cost_tolerance"] = d(&c.mpc.cost_tolerance);
  mpc["ls_alpha0"] = d(&c.mpc.ls_alpha0);
  mpc["ls_beta"] = d(&c.mpc.ls_beta);
  mpc["ls_max_backtracks"] = i(&c.mpc.ls_max_backtracks);
  mpc["armijo_c"] = d(&c.mpc.armijo_c);
  mpc["state_penalty"] = d(&c.mpc.state_penalty);
  mpc["target_speed"] = d(&c.mpc.target_speed);

  auto& gates = schema["gates"];
  gates["red_threshold"] = d(&c.gates.red_threshold);
  gates["junction_threshold"] = d(&c.gates.junction_threshold);
  gates["junction_slow_factor"] = d(&c.gates.junction_slow_factor);

  auto& sim = schema["sim"];
  sim["deadlock_speed"] = d(&c.sim.deadlock_speed);
  sim["deadlock_time"] = d(&c.sim.deadlock_time);
  sim["baseline_kp"] = d(&c.baseline.kp);
  sim["baseline_ki"] = d(&c.baseline.ki);
  sim["baseline_kd"] = d(&c.baseline.kd);
  sim["baseline_integral_limit"] = d(&c.baseline.integral_limit);
  sim["baseline_lookahead_gain"] = d(&c.baseline.lookahead_gain);
  sim["baseline_lookahead_min"] = d(&c.baseline.lookahead_min);
  sim["baseline_lookahead_max"] = d(&c.baseline.lookahead_max);
  sim["baseline_stop_distance"] = d(&c.baseline.stop_distance);

  auto& infractions = schema["infractions"];
  infractions["pedestrian"] = d(&c.infractions.pedestrian);
  infractions["vehicle"] = d(&c.infractions.vehicle);
  infractions["cyclist"] = d(&c.infractions.cyclist);
  infractions["static"] = d(&c.infractions.static_object);
  infractions["red_light"] = d(&c.infractions.red_light);

  const auto sections = parse_ini(text);
  for (const auto& [section, keys] : sections) {
    const auto sit = schema.find(section);
    if (sit == schema.end())
      throw std::runtime_error("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const auto kit = sit->second.find(key);
      if (kit == sit->second.end())
        throw std::runtime_error("config: unknown key '" + key + "' in [" + section + "]");
      kit->second(value, "[" + section + "] " + key);
    }
  }

  c.vehicle.validate();  // also refreshes the cached stiffness term
  c.pf.validate();
  c.mpc.validate();
  c.baseline.validate();
  c.baseline.target_speed = c.mpc.target_speed;  // one cruise target for all variants
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (file: " + path + ")");
  }
}

}  // namespace pfmpc
