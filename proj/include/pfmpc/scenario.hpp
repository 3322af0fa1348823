#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pfmpc/simulator.hpp"

namespace pfmpc {

inline constexpr const char* kScenarioSchema = "pfmpc-scenario-v1";

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw std::runtime_error("scenario: unknown key '" + key + "' in " + where);
  }
}

inline std::vector<Vec2> parse_points(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw std::runtime_error("scenario: " + where + " must be an array");
  std::vector<Vec2> pts;
  pts.reserve(arr.size());
  for (const json& p : arr) {
    if (!p.is_array() || p.size() != 2)
      throw std::runtime_error("scenario: " + where + " entries must be [x, y]");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

inline std::vector<ScheduleEntry> parse_schedule(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw std::runtime_error("scenario: " + where + " must be an array");
  std::vector<ScheduleEntry> sched;
  sched.reserve(arr.size());
  for (const json& e : arr) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error("scenario: " + where + " entries must be [t, value]");
    sched.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return sched;
}

inline AgentSpec parse_agent(const json& j) {
  require_keys(j, {"name", "class", "length", "width", "motion"}, "agent");
  AgentSpec a;
  a.name = j.at("name").get<std::string>();
  a.cls = obstacle_class_from_string(j.at("class").get<std::string>());
  if (j.contains("length")) a.length = j.at("length").get<double>();
  if (j.contains("width")) a.width = j.at("width").get<double>();

  const json& m = j.at("motion");
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "static") {
    require_keys(m, {"kind", "x", "y", "heading"}, "agent motion");
    a.kind = AgentMotionKind::static_pose;
    a.x = m.at("x").get<double>();
    a.y = m.at("y").get<double>();
    if (m.contains("heading")) a.heading = m.at("heading").get<double>();
  } else if (kind == "constant_velocity") {
    require_keys(m, {"kind", "x", "y", "heading", "vx", "vy"}, "agent motion");
    a.kind = AgentMotionKind::constant_velocity;
    a.x = m.at("x").get<double>();
    a.y = m.at("y").get<double>();
    if (m.contains("heading")) a.heading = m.at("heading").get<double>();
    if (m.contains("vx")) a.vx = m.at("vx").get<double>();
    if (m.contains("vy")) a.vy = m.at("vy").get<double>();
  } else if (kind == "schedule") {
    require_keys(m, {"kind", "keyframes"}, "agent motion");
    a.kind = AgentMotionKind::schedule;
    for (const json& k : m.at("keyframes")) {
      if (!k.is_array() || k.size() != 4)
        throw std::runtime_error("scenario: keyframes must be [t, x, y, heading]");
      a.keyframes.push_back(
          {k[0].get<double>(), k[1].get<double>(), k[2].get<double>(), k[3].get<double>()});
    }
  } else {
    throw std::runtime_error("scenario: unknown motion kind '" + kind + "'");
  }
  return a;
}

}  // namespace detail

inline ScenarioSpec parse_scenario(const nlohmann::json& j) {
  using detail::require_keys;
  require_keys(j,
               {"schema", "name", "route", "ego_start", "target_speed", "duration_max",
                "success_radius", "agents", "script", "red_light"},
               "scenario root");
  if (!j.contains("schema") || j.at("schema").get<std::string>() != kScenarioSchema)
    throw std::runtime_error(std::string("scenario: missing or unsupported schema tag (want '") +
                             kScenarioSchema + "')");

  ScenarioSpec sc;
  sc.name = j.at("name").get<std::string>();
  sc.route = detail::parse_points(j.at("route"), "route");

  if (j.contains("ego_start")) {
    const nlohmann::json& e = j.at("ego_start");
    require_keys(e, {"px", "py", "phi", "vx", "vy", "omega"}, "ego_start");
    if (e.contains("px")) sc.ego_start.px = e.at("px").get<double>();
    if (e.contains("py")) sc.ego_start.py = e.at("py").get<double>();
    if (e.contains("phi")) sc.ego_start.phi = e.at("phi").get<double>();
    if (e.contains("vx")) sc.ego_start.vx = e.at("vx").get<double>();
    if (e.contains("vy")) sc.ego_start.vy = e.at("vy").get<double>();
    if (e.contains("omega")) sc.ego_start.omega = e.at("omega").get<double>();
  }
  if (j.contains("target_speed")) sc.target_speed = j.at("target_speed").get<double>();
  if (j.contains("duration_max")) sc.duration_max = j.at("duration_max").get<double>();
  if (j.contains("success_radius")) sc.success_radius = j.at("success_radius").get<double>();

  if (j.contains("agents"))
    for (const nlohmann::json& a : j.at("agents")) sc.agents.push_back(detail::parse_agent(a));

  if (j.contains("script")) {
    const nlohmann::json& s = j.at("script");
    require_keys(s,
                 {"waypoint_count", "waypoint_spacing", "first_waypoint_offset", "sensing_range",
                  "planner_route", "p_red_light", "p_stop_junction", "p_on_road",
                  "yield_when_blocked"},
                 "script");
    PlannerScript& ps = sc.script;
    if (s.contains("waypoint_count")) ps.waypoint_count = s.at("waypoint_count").get<int>();
    if (s.contains("waypoint_spacing"))
      ps.waypoint_spacing = s.at("waypoint_spacing").get<double>();
    if (s.contains("first_waypoint_offset"))
      ps.first_waypoint_offset = s.at("first_waypoint_offset").get<double>();
    if (s.contains("sensing_range")) ps.sensing_range = s.at("sensing_range").get<double>();
    if (s.contains("planner_route"))
      ps.planner_route = detail::parse_points(s.at("planner_route"), "planner_route");
    if (s.contains("p_red_light"))
      ps.p_red_light = detail::parse_schedule(s.at("p_red_light"), "p_red_light");
    if (s.contains("p_stop_junction"))
      ps.p_stop_junction = detail::parse_schedule(s.at("p_stop_junction"), "p_stop_junction");
    if (s.contains("p_on_road"))
      ps.p_on_road = detail::parse_schedule(s.at("p_on_road"), "p_on_road");
    if (s.contains("yield_when_blocked")) {
      const nlohmann::json& y = s.at("yield_when_blocked");
      require_keys(y, {"radius", "corridor_halfwidth"}, "yield_when_blocked");
      ps.yield_rule.enabled = true;
      ps.yield_rule.radius = y.at("radius").get<double>();
      ps.yield_rule.corridor_halfwidth = y.at("corridor_halfwidth").get<double>();
    }
  }

  if (j.contains("red_light")) {
    const nlohmann::json& r = j.at("red_light");
    require_keys(r, {"arc_s", "from_t", "until_t"}, "red_light");
    sc.red_light.enabled = true;
    sc.red_light.arc_s = r.at("arc_s").get<double>();
    sc.red_light.from_t = r.at("from_t").get<double>();
    sc.red_light.until_t = r.at("until_t").get<double>();
  }

  sc.validate();
  return sc;
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& sc) {
  nlohmann::json j;
  j["schema"] = kScenarioSchema;
  j["name"] = sc.name;
  j["route"] = nlohmann::json::array();
  for (const Vec2& p : sc.route) j["route"].push_back({p.x(), p.y()});
  j["ego_start"] = {{"px", sc.ego_start.px}, {"py", sc.ego_start.py},
                    {"phi", sc.ego_start.phi}, {"vx", sc.ego_start.vx},
                    {"vy", sc.ego_start.vy},  {"omega", sc.ego_start.omega}};
  if (sc.target_speed >= 0.0) j["target_speed"] = sc.target_speed;
  j["duration_max"] = sc.duration_max;
  j["success_radius"] = sc.success_radius;

  j["agents"] = nlohmann::json::array();
  for (const AgentSpec& a : sc.agents) {
    nlohmann::json ja{{"name", a.name},     {"class", to_string(a.cls)},
                      {"length", a.length}, {"width", a.width}};
    switch (a.kind) {
      case AgentMotionKind::static_pose:
        ja["motion"] = {{"kind", "static"}, {"x", a.x}, {"y", a.y}, {"heading", a.heading}};
        break;
      case AgentMotionKind::constant_velocity:
        ja["motion"] = {{"kind", "constant_velocity"}, {"x", a.x},   {"y", a.y},
                        {"heading", a.heading},        {"vx", a.vx}, {"vy", a.vy}};
        break;
      case AgentMotionKind::schedule: {
        nlohmann::json kf = nlohmann::json::array();
        for (const AgentKeyframe& k : a.keyframes) kf.push_back({k.t, k.x, k.y, k.heading});
        ja["motion"] = {{"kind", "schedule"}, {"keyframes", kf}};
        break;
      }
    }
    j["agents"].push_back(ja);
  }

  const PlannerScript& ps = sc.script;
  nlohmann::json s{{"waypoint_count", ps.waypoint_count},
                   {"waypoint_spacing", ps.waypoint_spacing},
                   {"first_waypoint_offset", ps.first_waypoint_offset},
                   {"sensing_range", ps.sensing_range}};
  if (!ps.planner_route.empty()) {
    s["planner_route"] = nlohmann::json::array();
    for (const Vec2& p : ps.planner_route) s["planner_route"].push_back({p.x(), p.y()});
  }
  const auto dump_schedule = [](const std::vector<ScheduleEntry>& sched) {
    nlohmann::json a = nlohmann::json::array();
    for (const ScheduleEntry& e : sched) a.push_back({e.t, e.value});
    return a;
  };
  s["p_red_light"] = dump_schedule(ps.p_red_light);
  s["p_stop_junction"] = dump_schedule(ps.p_stop_junction);
  s["p_on_road"] = dump_schedule(ps.p_on_road);
  if (ps.yield_rule.enabled)
    s["yield_when_blocked"] = {{"radius", ps.yield_rule.radius},
                               {"corridor_halfwidth", ps.yield_rule.corridor_halfwidth}};
  j["script"] = s;

  if (sc.red_light.enabled)
    j["red_light"] = {{"arc_s", sc.red_light.arc_s}, {"from_t", sc.red_light.from_t},
                      {"until_t", sc.red_light.until_t}};
  return j;
}

inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("scenario: parse error in " + path + ": " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (file: " + path + ")");
  }
}

}  // namespace pfmpc
