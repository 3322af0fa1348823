#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pfmpc/mpc.hpp"
#include "pfmpc/reference.hpp"
#include "pfmpc/vehicle.hpp"

namespace pfmpc {

// Classic tracking stack used as the comparison baseline: PID on speed,
// pure pursuit on the waypoint polyline, and a hard full-brake stop when a
// front obstacle gets closer than stop_distance. No obstacle cost, no
// swerving: it follows the planner literally.
struct BaselineConfig {
  double kp = 1.2;
  double ki = 0.2;
  double kd = 0.05;
  double integral_limit = 2.0;    // anti-windup clamp on the integral term
  double lookahead_gain = 0.6;    // lookahead distance = gain * vx
  double lookahead_min = 3.0;
  double lookahead_max = 12.0;
  double stop_distance = 6.0;     // hard-stop trigger on front-obstacle distance
  double target_speed = 8.0;

  void validate() const {
    if (kp < 0.0 || ki < 0.0 || kd < 0.0)
      throw std::invalid_argument("baseline: PID gains must be non-negative");
    if (!(lookahead_min > 0.0) || lookahead_max < lookahead_min)
      throw std::invalid_argument("baseline: bad lookahead range");
    if (stop_distance < 0.0)
      throw std::invalid_argument("baseline: stop_distance must be non-negative");
  }
};

class TrackingPidController {
 public:
  TrackingPidController(VehicleParams vehicle, BaselineConfig cfg, GateThresholds gates,
                        double corridor_extra = 0.5)
      : vehicle_(vehicle), cfg_(cfg), gates_(gates),
        corridor_halfwidth_(vehicle.width * 0.5 + corridor_extra),
        target_speed_(cfg.target_speed) {
    vehicle_.validate();
    cfg_.validate();
  }

  void set_target_speed(double v) { target_speed_ = v; }
  double target_speed() const { return target_speed_; }

  CycleDecision cycle(const VehicleState& ego, const PlannerOutput& planner_ego_frame) {
    planner_ego_frame.validate();
    const Pose2 pose{ego.px, ego.py, ego.phi};
    const PlannerOutput global = to_global(planner_ego_frame, pose);

    CycleDecision d;
    d.p_on_road = global.p_on_road;

    if (planner_ego_frame.distinct_waypoints() < 2) {
      d.emergency = true;
      const GateResult gate =
          gate_controls({vehicle_.u_min.accel, 0.0}, global, gates_, vehicle_);
      d.control = gate.control;
      d.red_light_gate = gate.red_light_gate;
      d.junction_gate = gate.junction_gate;
      speed_scale_ = gate.next_speed_scale;
      integral_ = 0.0;
      prev_error_ = 0.0;
      return d;
    }

    // dedupe waypoints so the polyline constructor accepts them
    std::vector<Vec2> pts;
    pts.reserve(global.waypoints.size());
    for (const Vec2& w : global.waypoints)
      if (pts.empty() || (w - pts.back()).norm() > 1e-9) pts.push_back(w);
    const Polyline path(pts);

    const double target = target_speed_ * speed_scale_;
    const double error = target - ego.vx;
    integral_ = std::clamp(integral_ + error * vehicle_.dt, -cfg_.integral_limit,
                           cfg_.integral_limit);
    const double derivative = (error - prev_error_) / vehicle_.dt;
    prev_error_ = error;
    double accel = cfg_.kp * error + cfg_.ki * integral_ + cfg_.kd * derivative;

    // pure pursuit steering toward a speed-scaled lookahead point
    const double lookahead =
        std::clamp(cfg_.lookahead_gain * ego.vx, cfg_.lookahead_min, cfg_.lookahead_max);
    const PolylineProjection proj = path.project({ego.px, ego.py});
    const Vec2 goal = path.point_at(proj.arc_s + lookahead);
    const Vec2 rel = rotate(goal - Vec2{ego.px, ego.py}, -ego.phi);
    const double dist = std::max(rel.norm(), 1e-6);
    const double alpha = std::atan2(rel.y(), rel.x());
    double steer = std::atan2(2.0 * vehicle_.wheelbase() * std::sin(alpha), dist);

    d.d_safety =
        select_front_obstacle(ego, path, global.obstacles, corridor_halfwidth_).value_or(-1.0);
    if (d.d_safety >= 0.0 && d.d_safety < cfg_.stop_distance) {
      accel = vehicle_.u_min.accel;  // hard stop, literal planner following otherwise
      integral_ = 0.0;
    }

    const GateResult gate =
        gate_controls(clamp_control({accel, steer}, vehicle_), global, gates_, vehicle_);
    d.control = clamp_control(gate.control, vehicle_);
    d.red_light_gate = gate.red_light_gate;
    d.junction_gate = gate.junction_gate;
    speed_scale_ = gate.next_speed_scale;
    return d;
  }

  const VehicleParams& vehicle() const { return vehicle_; }

 private:
  VehicleParams vehicle_;
  BaselineConfig cfg_;
  GateThresholds gates_;
  double corridor_halfwidth_;
  double target_speed_;
  double speed_scale_ = 1.0;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
};

}  // namespace pfmpc
