#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfmpc/geometry.hpp"
#include "pfmpc/vehicle.hpp"

namespace pfmpc {

enum class ObstacleClass { vehicle, cyclist, pedestrian, static_object };

inline std::string to_string(ObstacleClass c) {
  switch (c) {
    case ObstacleClass::vehicle: return "vehicle";
    case ObstacleClass::cyclist: return "cyclist";
    case ObstacleClass::pedestrian: return "pedestrian";
    case ObstacleClass::static_object: return "static";
  }
  return "vehicle";
}

inline ObstacleClass obstacle_class_from_string(const std::string& s) {
  if (s == "vehicle") return ObstacleClass::vehicle;
  if (s == "cyclist") return ObstacleClass::cyclist;
  if (s == "pedestrian") return ObstacleClass::pedestrian;
  if (s == "static") return ObstacleClass::static_object;
  throw std::invalid_argument("unknown obstacle class: " + s);
}

// One repulsive ellipse. half_len_a/half_wid_b are the ellipse semi-axes
// (already inflated from the physical footprint, see ellipse_axes_from_footprint).
struct ObstacleDescriptor {
  ObstacleClass cls = ObstacleClass::vehicle;
  double cx = 0.0, cy = 0.0;  // center, global frame (ego frame inside PlannerOutput)
  double theta = 0.0;         // orientation, rad
  double half_len_a = 1.0;    // semi-major axis, m
  double half_wid_b = 1.0;    // semi-minor axis, m
  double speed_x = 0.0, speed_y = 0.0;  // m/s, same frame as cx/cy

  void validate() const {
    if (!(half_len_a > 0.0 && half_wid_b > 0.0 && half_len_a >= half_wid_b))
      throw std::invalid_argument("obstacle: require half_len_a >= half_wid_b > 0");
  }
};

struct PFGains {
  double k_base = 60.0;  // base obstacle gain K
  double k_c = 5.0;      // front-obstacle (ACC) gain K_c
  double scale_vehicle = 1.0;
  double scale_cyclist = 2.0;
  double scale_pedestrian = 3.0;
  double scale_static = 1.0;
  double d_epsilon = 0.001;   // ACC denominator guard, m
  double nd2_floor = 0.1;     // normalized-distance^2 floor; caps each term at gain/nd2_floor
  double axis_len_scale = 2.0;   // ellipse a = obstacle_length * axis_len_scale
  double axis_wid_scale = 1.25;  // ellipse b = obstacle_width * axis_wid_scale
  double corridor_extra = 0.5;   // corridor halfwidth = ego_width/2 + corridor_extra
  bool printed_rotation = true;  // componentwise rotation form vs standard rigid rotation
  bool propagate_obstacles = true;  // constant-velocity obstacle motion across the horizon

  double class_scale(ObstacleClass c) const {
    switch (c) {
      case ObstacleClass::vehicle: return scale_vehicle;
      case ObstacleClass::cyclist: return scale_cyclist;
      case ObstacleClass::pedestrian: return scale_pedestrian;
      case ObstacleClass::static_object: return scale_static;
    }
    return scale_vehicle;
  }

  void validate() const {
    if (k_base < 0.0 || k_c < 0.0 || scale_vehicle < 0.0 || scale_cyclist < 0.0 ||
        scale_pedestrian < 0.0 || scale_static < 0.0)
      throw std::invalid_argument("pf gains must be non-negative");
    if (!(scale_pedestrian >= scale_cyclist && scale_cyclist >= scale_vehicle))
      throw std::invalid_argument("pf class scales must order pedestrian >= cyclist >= vehicle");
    if (!(nd2_floor > 0.0)) throw std::invalid_argument("nd2_floor must be positive");
  }
};

inline std::pair<double, double> ellipse_axes_from_footprint(double length, double width,
                                                             const PFGains& g) {
  return {length * g.axis_len_scale, width * g.axis_wid_scale};
}

// Ego position mapped into the obstacle ellipse's test coordinates.
//
// The componentwise (printed) form collapses the offset-diagonal * rotation
// matrix product row by row: the x offset is scaled by (cos t + sin t), the
// y offset by (cos t - sin t). The standard form rotates the offset into the
// ellipse body frame by -theta. Both return the obstacle center when the ego
// sits on it and are the identity when theta = 0.
inline Vec2 rotate_into_ellipse(double ego_x, double ego_y, const ObstacleDescriptor& o,
                                bool printed_form = true) {
  const double dx = ego_x - o.cx, dy = ego_y - o.cy;
  const double c = std::cos(o.theta), s = std::sin(o.theta);
  if (printed_form) return {o.cx + dx * (c + s), o.cy + dy * (c - s)};
  return {o.cx + dx * c + dy * s, o.cy - dx * s + dy * c};
}

namespace detail {

// (x_rot - cx)^2/a^2 + (y_rot - cy)^2/b^2 for one obstacle.
inline double normalized_dist2(double ex, double ey, const ObstacleDescriptor& o,
                               bool printed_form) {
  const Vec2 r = rotate_into_ellipse(ex, ey, o, printed_form);
  const double nx = (r.x() - o.cx) / o.half_len_a;
  const double ny = (r.y() - o.cy) / o.half_wid_b;
  return nx * nx + ny * ny;
}

// d(normalized_dist2)/d(ex, ey).
inline Vec2 normalized_dist2_grad(double ex, double ey, const ObstacleDescriptor& o,
                                  bool printed_form) {
  const double c = std::cos(o.theta), s = std::sin(o.theta);
  const double dx = ex - o.cx, dy = ey - o.cy;
  const double ia2 = 1.0 / (o.half_len_a * o.half_len_a);
  const double ib2 = 1.0 / (o.half_wid_b * o.half_wid_b);
  if (printed_form) {
    const double sx = c + s, sy = c - s;
    return {2.0 * sx * sx * dx * ia2, 2.0 * sy * sy * dy * ib2};
  }
  const double xb = dx * c + dy * s;
  const double yb = -dx * s + dy * c;
  return {2.0 * (xb * ia2 * c - yb * ib2 * s), 2.0 * (xb * ia2 * s + yb * ib2 * c)};
}

}  // namespace detail

// Eq-style repulsive sum: each obstacle contributes
// class_scale * k_o_effective / normalized_dist2, with the denominator
// floored at nd2_floor so the cost stays finite at the center.
inline double obstacle_potential(double ego_x, double ego_y,
                                 const std::vector<ObstacleDescriptor>& obstacles,
                                 const PFGains& gains, double k_o_effective,
                                 bool* capped = nullptr) {
  if (capped) *capped = false;
  double total = 0.0;
  for (const ObstacleDescriptor& o : obstacles) {
    o.validate();
    double nd2 = detail::normalized_dist2(ego_x, ego_y, o, gains.printed_rotation);
    if (nd2 < gains.nd2_floor) {
      nd2 = gains.nd2_floor;
      if (capped) *capped = true;
    }
    total += gains.class_scale(o.cls) * k_o_effective / nd2;
  }
  return total;
}

// Gradient of obstacle_potential w.r.t. the ego position. Zero inside the
// capped region, matching the flat floor.
inline Vec2 obstacle_potential_gradient(double ego_x, double ego_y,
                                        const std::vector<ObstacleDescriptor>& obstacles,
                                        const PFGains& gains, double k_o_effective) {
  Vec2 grad{0.0, 0.0};
  for (const ObstacleDescriptor& o : obstacles) {
    const double nd2 = detail::normalized_dist2(ego_x, ego_y, o, gains.printed_rotation);
    if (nd2 < gains.nd2_floor) continue;
    const double gain = gains.class_scale(o.cls) * k_o_effective;
    grad -= (gain / (nd2 * nd2)) * detail::normalized_dist2_grad(ego_x, ego_y, o,
                                                                 gains.printed_rotation);
  }
  return grad;
}

// Front-obstacle (adaptive cruise) cost: K_c * accel * speed / (d + eps).
// A negative d_safety means "no front obstacle" and disables the term.
inline double front_obstacle_cost(double accel_cmd, double ego_speed, double d_safety,
                                  const PFGains& gains) {
  if (d_safety < 0.0) return 0.0;
  return gains.k_c * accel_cmd * ego_speed / (d_safety + gains.d_epsilon);
}

// Confidence-modulated obstacle gain: K / (p_on_road + 0.5).
inline double effective_obstacle_gain(double k_base, double p_on_road) {
  if (p_on_road < 0.0 || p_on_road > 1.0)
    throw std::invalid_argument("p_on_road must be in [0, 1]");
  return k_base / (p_on_road + 0.5);
}

// Distance to the nearest obstacle whose center lies inside the forward
// corridor around the reference polyline; nullopt when the set is empty.
inline std::optional<double> select_front_obstacle(const VehicleState& ego,
                                                   const Polyline& reference,
                                                   const std::vector<ObstacleDescriptor>& obstacles,
                                                   double corridor_halfwidth) {
  const double s_ego = reference.project({ego.px, ego.py}).arc_s;
  std::optional<double> best;
  for (const ObstacleDescriptor& o : obstacles) {
    const PolylineProjection proj = reference.project({o.cx, o.cy});
    if (proj.distance > corridor_halfwidth) continue;
    if (proj.arc_s < s_ego) continue;
    const double d = std::hypot(o.cx - ego.px, o.cy - ego.py);
    if (!best || d < *best) best = d;
  }
  return best;
}

}  // namespace pfmpc
