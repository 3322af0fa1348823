#pragma once

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pfmpc/potential_field.hpp"
#include "pfmpc/reference.hpp"
#include "pfmpc/vehicle.hpp"

namespace pfmpc {

struct MPCConfig {
  int horizon = 20;
  Vector6d w_x = (Vector6d() << 15.0, 15.0, 10.0, 5.0, 1.0, 1.0).finished();
  Eigen::Vector2d w_du{1.0, 10.0};  // control-rate weights (accel, steer)
  Eigen::Vector2d w_u{0.5, 0.5};    // control-effort weights
  int max_iters = 60;
  double step_tolerance = 1e-5;   // infinity norm of the control update
  double cost_tolerance = 1e-7;   // relative cost decrease
  double ls_alpha0 = 1.0;         // initial line-search step
  double ls_beta = 0.5;           // backtracking shrink factor
  int ls_max_backtracks = 40;
  double armijo_c = 1e-4;
  double state_penalty = 50.0;    // quadratic penalty weight outside x_min/x_max
  double target_speed = 8.0;      // m/s, default cruise target

  void validate() const {
    if (horizon < 2) throw std::invalid_argument("mpc: horizon must be >= 2");
    if (w_x.minCoeff() < 0.0 || w_du.minCoeff() < 0.0 || w_u.minCoeff() < 0.0)
      throw std::invalid_argument("mpc: weights must be non-negative");
    if (!(step_tolerance > 0.0 && cost_tolerance > 0.0))
      throw std::invalid_argument("mpc: tolerances must be positive");
    if (!(ls_alpha0 > 0.0 && ls_beta > 0.0 && ls_beta < 1.0))
      throw std::invalid_argument("mpc: bad line-search parameters");
  }
};

// Position/yaw tracking weights scale with the on-road confidence.
inline Vector6d modulated_weights(const Vector6d& w_x, double p_on_road) {
  Vector6d w = w_x;
  const double f = p_on_road + 0.5;
  w[0] *= f;
  w[1] *= f;
  w[2] *= f;
  return w;
}

struct CostBreakdown {
  double tracking = 0.0;
  double smoothness = 0.0;
  double effort = 0.0;
  double obstacle = 0.0;  // F_O summed over the horizon
  double acc = 0.0;       // F_C summed over the horizon
  double bounds = 0.0;    // state-bound quadratic penalty

  double total() const { return tracking + smoothness + effort + obstacle + acc + bounds; }
};

struct MPCSolution {
  std::vector<ControlInput> controls;        // length N
  std::vector<VehicleState> predicted_states;  // length N+1, rollout of controls
  CostBreakdown breakdown;
  double total_cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// One receding-horizon problem instance, fully in the global frame.
struct MpcProblem {
  VehicleState x0;
  ReferenceTrajectory reference;              // N+1 states
  std::vector<ObstacleDescriptor> obstacles;  // global frame
  PFGains gains;
  double k_o_effective = 0.0;  // Eq-7 modulated gain
  Vector6d w_x_mod = (Vector6d() << 15.0, 15.0, 10.0, 5.0, 1.0, 1.0).finished();
  double d_safety = -1.0;      // <0 means no front obstacle
  ControlInput u_prev{0.0, 0.0};
};

namespace detail {

// Obstacle poses per horizon step (constant-velocity propagation when enabled).
inline std::vector<std::vector<ObstacleDescriptor>> obstacle_table(const MpcProblem& prob,
                                                                   int horizon, double dt) {
  std::vector<std::vector<ObstacleDescriptor>> table(static_cast<std::size_t>(horizon) + 1,
                                                     prob.obstacles);
  if (prob.gains.propagate_obstacles) {
    for (int k = 1; k <= horizon; ++k) {
      const double t = dt * static_cast<double>(k);
      for (ObstacleDescriptor& o : table[static_cast<std::size_t>(k)]) {
        o.cx += o.speed_x * t;
        o.cy += o.speed_y * t;
      }
    }
  }
  return table;
}

inline Vector6d state_diff(const VehicleState& x, const VehicleState& ref) {
  Vector6d d = x.vec() - ref.vec();
  d[2] = wrap_angle(x.phi - ref.phi);
  return d;
}

inline CostBreakdown evaluate_with_table(
    const MpcProblem& prob, const std::vector<ControlInput>& controls, const MPCConfig& cfg,
    const VehicleParams& params, const std::vector<std::vector<ObstacleDescriptor>>& obstacles_k,
    std::vector<VehicleState>* states_out = nullptr) {
  const int n = static_cast<int>(controls.size());
  const std::vector<VehicleState> states = rollout(prob.x0, controls, params);

  CostBreakdown b;
  for (int k = 0; k <= n; ++k) {
    const VehicleState& x = states[static_cast<std::size_t>(k)];
    const Vector6d d = state_diff(x, prob.reference.states[static_cast<std::size_t>(k)]);
    b.tracking += (prob.w_x_mod.array() * d.array().square()).sum();
    b.obstacle += obstacle_potential(x.px, x.py, obstacles_k[static_cast<std::size_t>(k)],
                                     prob.gains, prob.k_o_effective);
    if (k >= 1 && cfg.state_penalty > 0.0) {
      const Vector6d v = x.vec();
      for (int i = 0; i < 6; ++i) {
        const double over = std::max(0.0, v[i] - params.x_max[i]);
        const double under = std::max(0.0, params.x_min[i] - v[i]);
        b.bounds += cfg.state_penalty * (over * over + under * under);
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    const ControlInput& u = controls[static_cast<std::size_t>(k)];
    const ControlInput prev = k == 0 ? prob.u_prev : controls[static_cast<std::size_t>(k) - 1];
    const double da = u.accel - prev.accel, dsteer = u.steer - prev.steer;
    b.smoothness += cfg.w_du[0] * da * da + cfg.w_du[1] * dsteer * dsteer;
    b.effort += cfg.w_u[0] * u.accel * u.accel + cfg.w_u[1] * u.steer * u.steer;
    b.acc += front_obstacle_cost(u.accel, states[static_cast<std::size_t>(k)].vx, prob.d_safety,
                                 prob.gains);
  }
  if (states_out) *states_out = states;
  return b;
}

}  // namespace detail

// Full horizon cost, split by term. `controls` must have N entries matching
// the reference's N+1 states.
inline CostBreakdown evaluate_cost(const MpcProblem& prob, const std::vector<ControlInput>& controls,
                                   const MPCConfig& cfg, const VehicleParams& params) {
  if (controls.size() + 1 != prob.reference.states.size())
    throw std::invalid_argument("evaluate_cost: control count does not match reference");
  const auto table = detail::obstacle_table(prob, static_cast<int>(controls.size()), params.dt);
  return detail::evaluate_with_table(prob, controls, cfg, params, table);
}

// Exact gradient of the total cost w.r.t. the stacked controls
// (a0, d0, a1, d1, ...), computed by the adjoint recursion through the
// dynamics Jacobians.
inline Eigen::VectorXd cost_gradient(const MpcProblem& prob,
                                     const std::vector<ControlInput>& controls,
                                     const MPCConfig& cfg, const VehicleParams& params) {
  const int n = static_cast<int>(controls.size());
  const auto table = detail::obstacle_table(prob, n, params.dt);
  const std::vector<VehicleState> states = rollout(prob.x0, controls, params);

  std::vector<Matrix6d> A(static_cast<std::size_t>(n));
  std::vector<Matrix62d> B(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    jacobians(states[static_cast<std::size_t>(k)], controls[static_cast<std::size_t>(k)], params,
              A[static_cast<std::size_t>(k)], B[static_cast<std::size_t>(k)]);

  const double d_eps = prob.d_safety + prob.gains.d_epsilon;
  const bool acc_active = prob.d_safety >= 0.0;

  // stage-cost state gradient at step k (tracking + F_O + bounds penalty)
  const auto stage_state_grad = [&](int k) {
    const VehicleState& x = states[static_cast<std::size_t>(k)];
    Vector6d g = 2.0 * (prob.w_x_mod.array() *
                        detail::state_diff(x, prob.reference.states[static_cast<std::size_t>(k)])
                            .array())
                           .matrix();
    const Vec2 pf = obstacle_potential_gradient(x.px, x.py, table[static_cast<std::size_t>(k)],
                                                prob.gains, prob.k_o_effective);
    g[0] += pf.x();
    g[1] += pf.y();
    if (k >= 1 && cfg.state_penalty > 0.0) {
      const Vector6d v = x.vec();
      for (int i = 0; i < 6; ++i) {
        if (v[i] > params.x_max[i]) g[i] += 2.0 * cfg.state_penalty * (v[i] - params.x_max[i]);
        if (v[i] < params.x_min[i]) g[i] -= 2.0 * cfg.state_penalty * (params.x_min[i] - v[i]);
      }
    }
    if (acc_active && k < n)
      g[3] += prob.gains.k_c * controls[static_cast<std::size_t>(k)].accel / d_eps;
    return g;
  };

  Eigen::VectorXd grad(2 * n);
  Vector6d lambda = stage_state_grad(n);
  for (int k = n - 1; k >= 0; --k) {
    const ControlInput& u = controls[static_cast<std::size_t>(k)];
    const ControlInput prev = k == 0 ? prob.u_prev : controls[static_cast<std::size_t>(k) - 1];

    Eigen::Vector2d gu = B[static_cast<std::size_t>(k)].transpose() * lambda;
    gu[0] += 2.0 * cfg.w_du[0] * (u.accel - prev.accel) + 2.0 * cfg.w_u[0] * u.accel;
    gu[1] += 2.0 * cfg.w_du[1] * (u.steer - prev.steer) + 2.0 * cfg.w_u[1] * u.steer;
    if (k + 1 < n) {
      const ControlInput& next = controls[static_cast<std::size_t>(k) + 1];
      gu[0] -= 2.0 * cfg.w_du[0] * (next.accel - u.accel);
      gu[1] -= 2.0 * cfg.w_du[1] * (next.steer - u.steer);
    }
    if (acc_active) gu[0] += prob.gains.k_c * states[static_cast<std::size_t>(k)].vx / d_eps;

    grad[2 * k] = gu[0];
    grad[2 * k + 1] = gu[1];

    lambda = stage_state_grad(k) + A[static_cast<std::size_t>(k)].transpose() * lambda;
  }
  return grad;
}

// Projected-gradient single shooting with backtracking line search. Controls
// stay inside the box by projection; the returned cost is never above the
// start evaluation.
inline MPCSolution solve(const MpcProblem& prob, const MPCConfig& cfg, const VehicleParams& params,
                         const MPCSolution* warm_start = nullptr) {
  cfg.validate();
  const int n = cfg.horizon;
  if (prob.reference.states.size() != static_cast<std::size_t>(n) + 1)
    throw std::invalid_argument("solve: reference length does not match horizon");

  std::vector<ControlInput> u(static_cast<std::size_t>(n), ControlInput{0.0, 0.0});
  if (warm_start && warm_start->controls.size() == static_cast<std::size_t>(n)) {
    // shift left one step, duplicate the last control
    for (int k = 0; k + 1 < n; ++k) u[static_cast<std::size_t>(k)] = warm_start->controls[static_cast<std::size_t>(k) + 1];
    u[static_cast<std::size_t>(n) - 1] = warm_start->controls.back();
  }
  for (ControlInput& c : u) c = clamp_control(c, params);

  const auto table = detail::obstacle_table(prob, n, params.dt);
  CostBreakdown best = detail::evaluate_with_table(prob, u, cfg, params, table);
  double cost = best.total();

  double alpha_carry = cfg.ls_alpha0;
  int iterations = 0;
  bool converged = false;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::VectorXd g = cost_gradient(prob, u, cfg, params);

    bool accepted = false;
    double alpha = alpha_carry;
    std::vector<ControlInput> trial(u.size());
    CostBreakdown trial_b;
    double step_inf = 0.0;
    for (int bt = 0; bt <= cfg.ls_max_backtracks; ++bt) {
      step_inf = 0.0;
      double decrease_pred = 0.0;
      for (int k = 0; k < n; ++k) {
        ControlInput t{u[static_cast<std::size_t>(k)].accel - alpha * g[2 * k],
                       u[static_cast<std::size_t>(k)].steer - alpha * g[2 * k + 1]};
        t = clamp_control(t, params);
        decrease_pred += g[2 * k] * (u[static_cast<std::size_t>(k)].accel - t.accel) +
                         g[2 * k + 1] * (u[static_cast<std::size_t>(k)].steer - t.steer);
        step_inf = std::max({step_inf, std::abs(t.accel - u[static_cast<std::size_t>(k)].accel),
                             std::abs(t.steer - u[static_cast<std::size_t>(k)].steer)});
        trial[static_cast<std::size_t>(k)] = t;
      }
      if (step_inf == 0.0) break;  // projection absorbed the whole step
      trial_b = detail::evaluate_with_table(prob, trial, cfg, params, table);
      if (trial_b.total() <= cost - cfg.armijo_c * decrease_pred) {
        accepted = true;
        break;
      }
      alpha *= cfg.ls_beta;
    }

    if (!accepted) {
      // stationary within line-search resolution; at iteration 0 this is the
      // not-converged fallback the caller handles
      converged = it > 0;
      break;
    }

    ++iterations;
    const double rel_decrease = (cost - trial_b.total()) / std::max(std::abs(cost), 1e-12);
    u = trial;
    cost = trial_b.total();
    best = trial_b;
    alpha_carry = std::min(alpha * 2.0, 1e8);
    if (step_inf < cfg.step_tolerance || rel_decrease < cfg.cost_tolerance) {
      converged = true;
      break;
    }
    if (it + 1 == cfg.max_iters) converged = false;
  }

  MPCSolution sol;
  sol.controls = u;
  sol.predicted_states = rollout(prob.x0, u, params);
  sol.breakdown = best;
  sol.total_cost = best.total();
  sol.iterations = iterations;
  sol.converged = converged;
  return sol;
}

// Telemetry surfaced per control cycle, mostly for the trajectory log.
struct CycleDecision {
  ControlInput control;   // applied control (post-gate)
  MPCSolution solution;   // empty controls on the emergency path
  CostBreakdown breakdown;
  double fo_current = 0.0;  // obstacle potential at the current ego position
  double d_safety = -1.0;
  bool red_light_gate = false;
  bool junction_gate = false;
  bool emergency = false;
  double p_on_road = 1.0;
};

// Receding-horizon controller: transforms the planner output, builds the
// reference, modulates gains/weights by on-road confidence, solves, and
// gates the first control. Stateful across cycles (warm start, u_prev,
// junction speed scale).
class MpcController {
 public:
  MpcController(VehicleParams vehicle, PFGains gains, MPCConfig mpc, GateThresholds gates)
      : vehicle_(vehicle), gains_(gains), mpc_(mpc), gates_(gates),
        target_speed_(mpc.target_speed) {
    vehicle_.validate();
    gains_.validate();
    mpc_.validate();
  }

  void set_target_speed(double v) { target_speed_ = v; }
  double target_speed() const { return target_speed_; }

  CycleDecision cycle(const VehicleState& ego, const PlannerOutput& planner_ego_frame) {
    planner_ego_frame.validate();
    const Pose2 pose{ego.px, ego.py, ego.phi};
    const PlannerOutput global = to_global(planner_ego_frame, pose);
    const double k_o_eff = effective_obstacle_gain(gains_.k_base, global.p_on_road);

    CycleDecision d;
    d.p_on_road = global.p_on_road;
    d.fo_current = obstacle_potential(ego.px, ego.py, global.obstacles, gains_, k_o_eff);

    if (planner_ego_frame.distinct_waypoints() < 2) {
      // planner gave us nothing to track: full brake, zero steer
      d.emergency = true;
      const GateResult gate =
          gate_controls({vehicle_.u_min.accel, 0.0}, global, gates_, vehicle_);
      d.control = gate.control;
      d.red_light_gate = gate.red_light_gate;
      d.junction_gate = gate.junction_gate;
      speed_scale_ = gate.next_speed_scale;
      u_prev_ = d.control;
      warm_valid_ = false;
      return d;
    }

    MpcProblem prob;
    prob.x0 = ego;
    prob.reference = build_reference(global.waypoints, ego, target_speed_ * speed_scale_,
                                     mpc_.horizon, vehicle_.dt);
    prob.obstacles = global.obstacles;
    prob.gains = gains_;
    prob.k_o_effective = k_o_eff;
    prob.w_x_mod = modulated_weights(mpc_.w_x, global.p_on_road);
    const double corridor = vehicle_.width * 0.5 + gains_.corridor_extra;
    prob.d_safety =
        select_front_obstacle(ego, prob.reference, global.obstacles, corridor).value_or(-1.0);
    prob.u_prev = u_prev_;

    const MPCSolution sol = solve(prob, mpc_, vehicle_, warm_valid_ ? &warm_ : nullptr);
    const GateResult gate = gate_controls(sol.controls.front(), global, gates_, vehicle_);

    d.control = clamp_control(gate.control, vehicle_);
    d.solution = sol;
    d.breakdown = sol.breakdown;
    d.d_safety = prob.d_safety;
    d.red_light_gate = gate.red_light_gate;
    d.junction_gate = gate.junction_gate;

    speed_scale_ = gate.next_speed_scale;
    u_prev_ = d.control;
    warm_ = sol;
    warm_valid_ = true;
    return d;
  }

  const VehicleParams& vehicle() const { return vehicle_; }
  const PFGains& gains() const { return gains_; }
  const MPCConfig& config() const { return mpc_; }

 private:
  VehicleParams vehicle_;
  PFGains gains_;
  MPCConfig mpc_;
  GateThresholds gates_;
  double target_speed_;
  double speed_scale_ = 1.0;
  ControlInput u_prev_{0.0, 0.0};
  MPCSolution warm_;
  bool warm_valid_ = false;
};

}  // namespace pfmpc
