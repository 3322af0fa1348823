#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfmpc/geometry.hpp"
#include "pfmpc/mpc.hpp"
#include "pfmpc/potential_field.hpp"
#include "pfmpc/reference.hpp"
#include "pfmpc/vehicle.hpp"

namespace pfmpc {

// ---------------------------------------------------------------------------
// scripted agents

enum class AgentMotionKind { static_pose, constant_velocity, schedule };

struct AgentKeyframe {
  double t = 0.0;
  double x = 0.0, y = 0.0, heading = 0.0;
};

struct AgentPose {
  double x = 0.0, y = 0.0, heading = 0.0;
};

// A scripted traffic participant. Pose is a pure function of time, so runs
// are reproducible by construction; agents never react to the ego.
struct AgentSpec {
  std::string name;
  ObstacleClass cls = ObstacleClass::vehicle;
  double length = 4.5, width = 1.9;  // physical footprint, m
  AgentMotionKind kind = AgentMotionKind::static_pose;
  double x = 0.0, y = 0.0, heading = 0.0;  // static / constant-velocity start pose
  double vx = 0.0, vy = 0.0;               // global m/s (constant-velocity only)
  std::vector<AgentKeyframe> keyframes;    // schedule only, sorted by t

  void validate() const {
    if (!(length > 0.0 && width > 0.0))
      throw std::invalid_argument("agent " + name + ": non-positive footprint");
    if (kind == AgentMotionKind::schedule) {
      if (keyframes.size() < 2)
        throw std::invalid_argument("agent " + name + ": schedule needs >= 2 keyframes");
      for (std::size_t i = 1; i < keyframes.size(); ++i)
        if (!(keyframes[i].t > keyframes[i - 1].t))
          throw std::invalid_argument("agent " + name + ": keyframe times must increase");
    }
  }

  AgentPose pose_at(double t) const {
    switch (kind) {
      case AgentMotionKind::static_pose:
        return {x, y, heading};
      case AgentMotionKind::constant_velocity:
        return {x + vx * t, y + vy * t, heading};
      case AgentMotionKind::schedule: {
        if (t <= keyframes.front().t)
          return {keyframes.front().x, keyframes.front().y, keyframes.front().heading};
        if (t >= keyframes.back().t)
          return {keyframes.back().x, keyframes.back().y, keyframes.back().heading};
        std::size_t i = 1;
        while (keyframes[i].t < t) ++i;
        const AgentKeyframe& a = keyframes[i - 1];
        const AgentKeyframe& b = keyframes[i];
        const double u = (t - a.t) / (b.t - a.t);
        return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y),
                a.heading + u * wrap_angle(b.heading - a.heading)};
      }
    }
    return {x, y, heading};
  }

  Vec2 velocity_at(double t) const {
    switch (kind) {
      case AgentMotionKind::static_pose:
        return Vec2::Zero();
      case AgentMotionKind::constant_velocity:
        return {vx, vy};
      case AgentMotionKind::schedule: {
        if (t < keyframes.front().t || t >= keyframes.back().t) return Vec2::Zero();
        std::size_t i = 1;
        while (keyframes[i].t < t) ++i;
        if (keyframes[i].t == t && i + 1 < keyframes.size()) ++i;  // slope of the segment ahead
        const AgentKeyframe& a = keyframes[i - 1];
        const AgentKeyframe& b = keyframes[i];
        const double inv = 1.0 / (b.t - a.t);
        return {(b.x - a.x) * inv, (b.y - a.y) * inv};
      }
    }
    return Vec2::Zero();
  }

  OrientedBox box_at(double t) const {
    const AgentPose p = pose_at(t);
    return {{p.x, p.y}, p.heading, length, width};
  }
};

// ---------------------------------------------------------------------------
// planner surrogate

// Piecewise-constant schedule entry: `value` holds from time `t` onward.
struct ScheduleEntry {
  double t = 0.0;
  double value = 0.0;
};

inline double schedule_value(const std::vector<ScheduleEntry>& sched, double t) {
  if (sched.empty()) return 0.0;
  double v = sched.front().value;
  for (const ScheduleEntry& e : sched) {
    if (e.t <= t) v = e.value;
    else break;
  }
  return v;
}

// Scripted stand-in for the upstream planner: emits waypoints along a route
// (optionally a deliberately flawed one), nearby agents as obstacle
// descriptors, and scheduled traffic probabilities — everything in the ego
// frame, like the interface it substitutes for.
struct PlannerScript {
  int waypoint_count = 10;
  double waypoint_spacing = 1.0;       // m between consecutive waypoints
  double first_waypoint_offset = 1.0;  // m ahead of the ego's projection
  double sensing_range = 60.0;         // m, obstacle reporting radius
  std::vector<Vec2> planner_route;     // optional flawed reference; empty → scenario route

  std::vector<ScheduleEntry> p_red_light{{0.0, 0.0}};
  std::vector<ScheduleEntry> p_stop_junction{{0.0, 0.0}};
  std::vector<ScheduleEntry> p_on_road{{0.0, 1.0}};

  // Mutual-yield behavior: while any moving agent sits inside this radius and
  // inside the forward corridor, the planner freezes and emits all waypoints
  // at the ego position (an empty plan, as a stopped-and-waiting planner does).
  struct YieldRule {
    bool enabled = false;
    double radius = 8.0;
    double corridor_halfwidth = 2.5;
  } yield_rule;

  void validate() const {
    if (waypoint_count < 1) throw std::invalid_argument("script: waypoint_count must be >= 1");
    if (!(waypoint_spacing > 0.0)) throw std::invalid_argument("script: waypoint_spacing <= 0");
    if (first_waypoint_offset < 0.0)
      throw std::invalid_argument("script: negative first_waypoint_offset");
    if (sensing_range <= 0.0) throw std::invalid_argument("script: sensing_range <= 0");
    for (const auto* s : {&p_red_light, &p_stop_junction, &p_on_road}) {
      if (s->empty()) throw std::invalid_argument("script: empty probability schedule");
      for (std::size_t i = 1; i < s->size(); ++i)
        if (!(s->at(i).t > s->at(i - 1).t))
          throw std::invalid_argument("script: schedule times must increase");
      for (const ScheduleEntry& e : *s)
        if (e.value < 0.0 || e.value > 1.0)
          throw std::invalid_argument("script: probability outside [0,1]");
    }
    if (yield_rule.enabled && (yield_rule.radius <= 0.0 || yield_rule.corridor_halfwidth <= 0.0))
      throw std::invalid_argument("script: yield rule needs positive radius and corridor");
  }
};

// Optional stop line on the route; crossing it while the window is active is
// a red-light infraction.
struct RedLightLine {
  bool enabled = false;
  double arc_s = 0.0;
  double from_t = 0.0;
  double until_t = 0.0;
};

// ---------------------------------------------------------------------------
// scenario + metrics

struct ScenarioSpec {
  std::string name;
  std::vector<Vec2> route;  // global waypoint polyline, >= 2 points
  VehicleState ego_start;
  double target_speed = -1.0;  // <0 → use the controller's configured target
  double duration_max = 60.0;  // s
  double success_radius = 3.0; // m around the route end
  std::vector<AgentSpec> agents;
  PlannerScript script;
  RedLightLine red_light;

  void validate() const {
    if (route.size() < 2) throw std::invalid_argument("scenario: route needs >= 2 points");
    if (!(duration_max > 0.0)) throw std::invalid_argument("scenario: duration_max <= 0");
    if (!(success_radius > 0.0)) throw std::invalid_argument("scenario: success_radius <= 0");
    script.validate();
    for (const AgentSpec& a : agents) a.validate();
  }
};

struct InfractionEvent {
  std::string type;  // "pedestrian" | "vehicle" | "cyclist" | "static" | "red_light"
  double time = 0.0;
  double x = 0.0, y = 0.0;
  std::string agent;
};

// Per-event score multipliers (leaderboard-style penalty products).
struct InfractionTable {
  double pedestrian = 0.50;
  double vehicle = 0.60;
  double cyclist = 0.60;
  double static_object = 0.65;
  double red_light = 0.70;

  double multiplier(const std::string& type) const {
    if (type == "pedestrian") return pedestrian;
    if (type == "vehicle") return vehicle;
    if (type == "cyclist") return cyclist;
    if (type == "static") return static_object;
    if (type == "red_light") return red_light;
    throw std::invalid_argument("unknown infraction type: " + type);
  }
};

inline double infraction_score(const std::vector<InfractionEvent>& events,
                               const InfractionTable& table) {
  double score = 1.0;
  for (const InfractionEvent& e : events) score *= table.multiplier(e.type);
  return score;
}

struct SimMetrics {
  double route_completion = 0.0;
  double infraction_score = 1.0;
  double driving_score = 0.0;  // = route_completion * infraction_score
  std::vector<InfractionEvent> events;
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  std::vector<double> min_distance_per_agent;  // same order as scenario agents
  bool deadlock = false;
  bool completed = false;
  bool invalid = false;   // controller threw; other fields reflect the partial run
  std::string error;
  double duration = 0.0;      // simulated seconds
  double wall_time_ms = 0.0;  // host wall time (excluded from deterministic output)
  std::uint64_t seed = 0;
};

// One trajectory-log row per tick: state before the step, the applied
// control, and the controller telemetry behind it.
struct LogRow {
  double t = 0.0;
  VehicleState state;
  ControlInput control;
  CostBreakdown breakdown;
  double fo_current = 0.0;
  double d_safety = -1.0;
  bool red_gate = false;
  bool junction_gate = false;
  bool emergency = false;
};

struct SimResult {
  SimMetrics metrics;
  std::vector<LogRow> log;
};

using ControllerFn = std::function<CycleDecision(const VehicleState&, const PlannerOutput&)>;

// Arc-length fraction of the route covered by the ego trace (projection,
// clamped monotone).
inline double route_completion(const Polyline& route, const std::vector<Vec2>& ego_trace) {
  double max_arc = 0.0;
  for (const Vec2& p : ego_trace) max_arc = std::max(max_arc, route.project(p).arc_s);
  return std::min(1.0, max_arc / route.length());
}

// The planner surrogate's output for one tick (exposed for tests).
inline PlannerOutput surrogate_output(const ScenarioSpec& scenario, const Polyline& route,
                                      const Polyline* flawed_route, double t,
                                      const VehicleState& ego, const PFGains& gains) {
  const PlannerScript& s = scenario.script;
  PlannerOutput out;
  out.p_red_light = schedule_value(s.p_red_light, t);
  out.p_stop_junction = schedule_value(s.p_stop_junction, t);
  out.p_on_road = schedule_value(s.p_on_road, t);

  const Vec2 ego_pos{ego.px, ego.py};
  bool yield_now = false;
  for (const AgentSpec& a : scenario.agents) {
    const AgentPose p = a.pose_at(t);
    const Vec2 center{p.x, p.y};
    const Vec2 d = center - ego_pos;
    if (d.norm() <= s.sensing_range) {
      ObstacleDescriptor o;
      o.cls = a.cls;
      o.cx = center.x();
      o.cy = center.y();
      o.theta = p.heading;
      const auto axes = ellipse_axes_from_footprint(a.length, a.width, gains);
      o.half_len_a = axes.first;
      o.half_wid_b = axes.second;
      const Vec2 v = a.velocity_at(t);
      o.speed_x = v.x();
      o.speed_y = v.y();
      out.obstacles.push_back(o);
    }
    if (s.yield_rule.enabled && a.kind != AgentMotionKind::static_pose) {
      const Vec2 rel = rotate(d, -ego.phi);
      if (d.norm() <= s.yield_rule.radius && rel.x() > 0.0 &&
          std::abs(rel.y()) <= s.yield_rule.corridor_halfwidth)
        yield_now = true;
    }
  }

  if (yield_now) {
    // stopped planner: every waypoint collapses onto the ego position
    out.waypoints.assign(static_cast<std::size_t>(s.waypoint_count), ego_pos);
  } else {
    const Polyline& path = (flawed_route != nullptr) ? *flawed_route : route;
    const double s0 = path.project(ego_pos).arc_s + s.first_waypoint_offset;
    out.waypoints.reserve(static_cast<std::size_t>(s.waypoint_count));
    for (int k = 0; k < s.waypoint_count; ++k) {
      const double arc = s0 + s.waypoint_spacing * static_cast<double>(k);
      if (arc <= path.length()) {
        out.waypoints.push_back(path.point_at(arc));
      } else {
        // extrapolate past the route end along the final direction
        const Vec2 end = path.point_at(path.length());
        out.waypoints.push_back(end + path.direction_at(path.length()) * (arc - path.length()));
      }
    }
  }

  return to_ego(out, Pose2{ego.px, ego.py, ego.phi});
}

namespace detail {

inline constexpr double kDeadlockSpeed = 0.1;  // m/s
inline constexpr double kDeadlockTime = 30.0;  // s

}  // namespace detail

// Closed-loop run: surrogate → controller → ego dynamics → agents →
// collision/metric bookkeeping, at the vehicle's dt, until the route is
// done, time runs out, or a deadlock is declared. Deterministic for a given
// (scenario, seed, config); the seed is recorded for provenance (all agents
// here are scripted, so nothing consumes it yet).
inline SimResult run(const ScenarioSpec& scenario, const ControllerFn& controller,
                     const VehicleParams& caller_params, const PFGains& gains,
                     const InfractionTable& infractions, std::uint64_t seed = 0,
                     double deadlock_speed = detail::kDeadlockSpeed,
                     double deadlock_time = detail::kDeadlockTime) {
  scenario.validate();
  VehicleParams params = caller_params;  // validate() refreshes derived terms
  params.validate();
  const auto wall_start = std::chrono::steady_clock::now();

  SimResult result;
  SimMetrics& m = result.metrics;
  m.seed = seed;
  m.min_distance_per_agent.assign(scenario.agents.size(),
                                  std::numeric_limits<double>::infinity());

  const Polyline route(scenario.route);
  std::optional<Polyline> flawed;
  if (!scenario.script.planner_route.empty()) flawed.emplace(scenario.script.planner_route);

  VehicleState ego = scenario.ego_start;
  double max_arc = 0.0;
  double stall_time = 0.0;
  bool red_light_done = false;
  std::vector<bool> in_collision(scenario.agents.size(), false);

  const auto observe = [&](double t) {
    const OrientedBox ego_box{{ego.px, ego.py}, ego.phi, params.length, params.width};
    for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
      const OrientedBox other = scenario.agents[i].box_at(t);
      const double dist = box_distance(ego_box, other);
      m.min_distance_per_agent[i] = std::min(m.min_distance_per_agent[i], dist);
      m.min_obstacle_distance = std::min(m.min_obstacle_distance, dist);
      const bool overlap = boxes_overlap(ego_box, other);
      if (overlap && !in_collision[i]) {
        m.events.push_back({to_string(scenario.agents[i].cls), t, ego.px, ego.py,
                            scenario.agents[i].name});
      }
      in_collision[i] = overlap;
    }
    const double prev_arc = max_arc;
    max_arc = std::max(max_arc, route.project({ego.px, ego.py}).arc_s);
    if (scenario.red_light.enabled && !red_light_done && t >= scenario.red_light.from_t &&
        t < scenario.red_light.until_t && prev_arc < scenario.red_light.arc_s &&
        max_arc >= scenario.red_light.arc_s) {
      m.events.push_back({"red_light", t, ego.px, ego.py, ""});
      red_light_done = true;
    }
    if ((Vec2{ego.px, ego.py} - scenario.route.back()).norm() <= scenario.success_radius)
      m.completed = true;
  };

  observe(0.0);

  const int max_ticks = static_cast<int>(std::ceil(scenario.duration_max / params.dt));
  double t = 0.0;
  for (int k = 0; k < max_ticks && !m.completed; ++k) {
    t = params.dt * static_cast<double>(k);

    const PlannerOutput planner =
        surrogate_output(scenario, route, flawed ? &*flawed : nullptr, t, ego, gains);

    CycleDecision d;
    try {
      d = controller(ego, planner);
    } catch (const std::exception& e) {
      m.invalid = true;
      m.error = e.what();
      break;
    }

    result.log.push_back({t, ego, d.control, d.breakdown, d.fo_current, d.d_safety,
                          d.red_light_gate, d.junction_gate, d.emergency});

    try {
      ego = step(ego, d.control, params);
    } catch (const std::exception& e) {
      m.invalid = true;
      m.error = e.what();
      break;
    }
    m.duration = t + params.dt;
    observe(m.duration);

    if (std::hypot(ego.vx, ego.vy) < deadlock_speed) {
      stall_time += params.dt;
      if (stall_time > deadlock_time && !m.completed) {
        m.deadlock = true;
        break;
      }
    } else {
      stall_time = 0.0;
    }
  }

  m.route_completion = m.completed ? 1.0 : std::min(1.0, max_arc / route.length());
  m.infraction_score = infraction_score(m.events, infractions);
  m.driving_score = m.route_completion * m.infraction_score;
  m.wall_time_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - wall_start)
                       .count();
  return result;
}

// ---------------------------------------------------------------------------
// trajectory log serialization

namespace detail {

inline void append_number(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  s += buf;
}

}  // namespace detail

inline constexpr const char* kTrajectoryHeader =
    "t,px,py,phi,vx,vy,omega,accel,steer,cost_tracking,cost_smoothness,cost_effort,"
    "cost_obstacle,cost_acc,cost_bounds,fo_current,d_safety,red_gate,junction_gate,emergency";

inline std::string trajectory_csv(const std::vector<LogRow>& rows) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const LogRow& r : rows) {
    const double fields[] = {r.t,
                             r.state.px,
                             r.state.py,
                             r.state.phi,
                             r.state.vx,
                             r.state.vy,
                             r.state.omega,
                             r.control.accel,
                             r.control.steer,
                             r.breakdown.tracking,
                             r.breakdown.smoothness,
                             r.breakdown.effort,
                             r.breakdown.obstacle,
                             r.breakdown.acc,
                             r.breakdown.bounds,
                             r.fo_current,
                             r.d_safety};
    bool first = true;
    for (double f : fields) {
      if (!first) out += ',';
      detail::append_number(out, f);
      first = false;
    }
    out += ',';
    out += r.red_gate ? '1' : '0';
    out += ',';
    out += r.junction_gate ? '1' : '0';
    out += ',';
    out += r.emergency ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace pfmpc
