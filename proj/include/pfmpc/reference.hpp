#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pfmpc/geometry.hpp"
#include "pfmpc/potential_field.hpp"
#include "pfmpc/spline.hpp"
#include "pfmpc/vehicle.hpp"

namespace pfmpc {

struct Pose2 {
  double x = 0.0, y = 0.0, heading = 0.0;
};

// Planner-head surrogate output: ego-frame waypoints, obstacle list and
// traffic probabilities. to_global() moves everything into the map frame.
struct PlannerOutput {
  std::vector<Vec2> waypoints;
  std::vector<ObstacleDescriptor> obstacles;
  double p_red_light = 0.0;
  double p_stop_junction = 0.0;
  double p_on_road = 1.0;

  void validate() const {
    for (double p : {p_red_light, p_stop_junction, p_on_road})
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("planner probability outside [0,1]");
  }

  std::size_t distinct_waypoints() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < waypoints.size(); ++i)
      if (i == 0 || (waypoints[i] - waypoints[i - 1]).norm() > 1e-9) ++n;
    return n;
  }
};

inline PlannerOutput to_global(const PlannerOutput& out, const Pose2& ego) {
  PlannerOutput g = out;
  for (Vec2& w : g.waypoints) w = Vec2{ego.x, ego.y} + rotate(w, ego.heading);
  for (ObstacleDescriptor& o : g.obstacles) {
    const Vec2 c = Vec2{ego.x, ego.y} + rotate({o.cx, o.cy}, ego.heading);
    const Vec2 v = rotate({o.speed_x, o.speed_y}, ego.heading);
    o.cx = c.x();
    o.cy = c.y();
    o.theta = wrap_angle(o.theta + ego.heading);
    o.speed_x = v.x();
    o.speed_y = v.y();
  }
  return g;
}

inline PlannerOutput to_ego(const PlannerOutput& out, const Pose2& ego) {
  PlannerOutput e = out;
  for (Vec2& w : e.waypoints) w = rotate(w - Vec2{ego.x, ego.y}, -ego.heading);
  for (ObstacleDescriptor& o : e.obstacles) {
    const Vec2 c = rotate(Vec2{o.cx, o.cy} - Vec2{ego.x, ego.y}, -ego.heading);
    const Vec2 v = rotate({o.speed_x, o.speed_y}, -ego.heading);
    o.cx = c.x();
    o.cy = c.y();
    o.theta = wrap_angle(o.theta - ego.heading);
    o.speed_x = v.x();
    o.speed_y = v.y();
  }
  return e;
}

// Time-parameterized 6-state reference for the horizon.
struct ReferenceTrajectory {
  std::vector<VehicleState> states;  // N+1 entries, global frame
  double target_speed = 0.0;

  Polyline polyline() const {
    std::vector<Vec2> pts;
    pts.reserve(states.size());
    for (const VehicleState& s : states) pts.emplace_back(s.px, s.py);
    // degenerate (zero-speed) references still need a valid polyline
    if (pts.size() >= 2 && (pts.back() - pts.front()).norm() < 1e-9) {
      const double h = states.front().phi;
      pts = {pts.front(), pts.front() + rotate({1.0, 0.0}, h)};
    }
    return Polyline(pts);
  }
};

// Fits a Catmull-Rom spline through the waypoints and resamples N+1 states
// at arc spacing target_speed*dt from the ego's closest projection. Heading
// follows the tangent, vx the target speed, omega = curvature * speed; past
// the spline end the reference extrapolates along the final tangent.
inline ReferenceTrajectory build_reference(const std::vector<Vec2>& waypoints_global,
                                           const VehicleState& ego, double target_speed,
                                           int horizon, double dt) {
  if (horizon < 1) throw std::invalid_argument("build_reference: horizon must be >= 1");
  if (target_speed < 0.0) throw std::invalid_argument("build_reference: negative target speed");
  if (waypoints_global.size() < 2)
    throw std::invalid_argument("build_reference: need at least 2 waypoints");
  // The anchor point added below must never rescue a waypoint set that
  // carries no direction of its own.
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < waypoints_global.size(); ++i)
    if (i == 0 || (waypoints_global[i] - waypoints_global[i - 1]).norm() > 1e-9) ++distinct;
  if (distinct < 2)
    throw std::invalid_argument("build_reference: waypoints carry no direction");

  // When the whole plan lies ahead of the vehicle (planners emit waypoints
  // starting some lead distance out), anchor the spline at the current
  // position so the k=0 tracking error measures deviation from the path,
  // not the planner's lead distance.
  std::vector<Vec2> pts;
  if (Polyline(waypoints_global).project({ego.px, ego.py}).arc_s < 1e-9)
    pts.emplace_back(ego.px, ego.py);
  pts.insert(pts.end(), waypoints_global.begin(), waypoints_global.end());

  const CatmullRomSpline spline(pts);
  const double s0 = spline.project_arc({ego.px, ego.py});
  const double step = target_speed * dt;
  const double s_end = spline.arc_length();

  ReferenceTrajectory ref;
  ref.target_speed = target_speed;
  ref.states.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int k = 0; k <= horizon; ++k) {
    const double s = s0 + step * static_cast<double>(k);
    VehicleState r;
    if (s <= s_end) {
      const Vec2 p = spline.position_at_arc(s);
      r.px = p.x();
      r.py = p.y();
      r.phi = spline.heading_at_arc(s);
      r.omega = spline.curvature_at_arc(s) * target_speed;
    } else {
      const Vec2 p = spline.end_point() + spline.end_direction() * (s - s_end);
      const Vec2 d = spline.end_direction();
      r.px = p.x();
      r.py = p.y();
      r.phi = std::atan2(d.y(), d.x());
      r.omega = 0.0;
    }
    r.vx = target_speed;
    r.vy = 0.0;
    ref.states.push_back(r);
  }
  return ref;
}

struct GateThresholds {
  double red_threshold = 0.5;
  double junction_threshold = 0.5;
  double junction_slow_factor = 0.5;
};

struct GateResult {
  ControlInput control;
  double next_speed_scale = 1.0;  // applied to the next cycle's target speed
  bool red_light_gate = false;
  bool junction_gate = false;
};

// Traffic-signal gating of a solved control: a confident red light forces
// max braking; a likely stop junction slows the next cycle's target speed.
inline GateResult gate_controls(const ControlInput& control, const PlannerOutput& output,
                                const GateThresholds& thresholds, const VehicleParams& params) {
  GateResult r;
  r.control = control;
  if (output.p_red_light > thresholds.red_threshold) {
    r.control.accel = params.u_min.accel;
    r.red_light_gate = true;
  }
  if (output.p_stop_junction > thresholds.junction_threshold) {
    r.next_speed_scale = thresholds.junction_slow_factor;
    r.junction_gate = true;
  }
  return r;
}

// select_front_obstacle over a built reference (convenience overload).
inline std::optional<double> select_front_obstacle(const VehicleState& ego,
                                                   const ReferenceTrajectory& reference,
                                                   const std::vector<ObstacleDescriptor>& obstacles,
                                                   double corridor_halfwidth) {
  if (reference.states.empty()) throw std::invalid_argument("empty reference");
  return select_front_obstacle(ego, reference.polyline(), obstacles, corridor_halfwidth);
}

}  // namespace pfmpc
