#pragma once

#include <Eigen/Core>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "pfmpc/geometry.hpp"

namespace pfmpc {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix62d = Eigen::Matrix<double, 6, 2>;

// Global-frame pose plus body-frame velocities and yaw rate.
struct VehicleState {
  double px = 0.0;     // m, global
  double py = 0.0;     // m, global
  double phi = 0.0;    // rad, wrapped to (-pi, pi]
  double vx = 0.0;     // m/s, body frame
  double vy = 0.0;     // m/s, body frame
  double omega = 0.0;  // rad/s

  Vector6d vec() const {
    Vector6d v;
    v << px, py, phi, vx, vy, omega;
    return v;
  }

  static VehicleState from_vec(const Vector6d& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  bool all_finite() const {
    return std::isfinite(px) && std::isfinite(py) && std::isfinite(phi) &&
           std::isfinite(vx) && std::isfinite(vy) && std::isfinite(omega);
  }
};

struct ControlInput {
  double accel = 0.0;  // m/s^2
  double steer = 0.0;  // rad, front wheel angle

  bool all_finite() const { return std::isfinite(accel) && std::isfinite(steer); }
};

// Single-track model constants. Cornering stiffnesses are stored negative,
// matching the source model's convention.
struct VehicleParams {
  double mass = 1845.0;    // kg
  double lf = 1.265;       // m, CG to front axle
  double lr = 1.682;       // m, CG to rear axle
  double kf = -128916.0;   // N/rad
  double kr = -85944.0;    // N/rad
  double iz = 4175.0;      // kg m^2
  double dt = 0.1;         // s
  double width = 1.9;      // m
  double length = 4.5;     // m

  ControlInput u_min{-6.0, -0.6};
  ControlInput u_max{3.0, 0.6};
  Vector6d x_min = (Vector6d() << -1e9, -1e9, -1e9, 0.0, -4.0, -2.0).finished();
  Vector6d x_max = (Vector6d() << 1e9, 1e9, 1e9, 20.0, 4.0, 2.0).finished();

  // Below vx_blend_low the update is purely kinematic; a linear blend runs
  // up to vx_blend_high where the dynamic rows take over.
  double vx_blend_low = 0.25;
  double vx_blend_high = 0.5;

  // l = lf*kf - lr*kr, refreshed by validate().
  double l = 1.265 * -128916.0 - 1.682 * -85944.0;

  double wheelbase() const { return lf + lr; }

  void validate() {
    if (!(mass > 0.0 && iz > 0.0 && lf > 0.0 && lr > 0.0 && dt > 0.0))
      throw std::invalid_argument("vehicle params: mass, iz, lf, lr, dt must be positive");
    if (!(vx_blend_high > vx_blend_low && vx_blend_low >= 0.0))
      throw std::invalid_argument("vehicle params: bad low-speed blend band");
    for (int i = 0; i < 6; ++i)
      if (!(x_min[i] <= x_max[i])) throw std::invalid_argument("vehicle params: x_min > x_max");
    if (!(u_min.accel <= u_max.accel && u_min.steer <= u_max.steer))
      throw std::invalid_argument("vehicle params: u_min > u_max");
    l = lf * kf - lr * kr;
  }
};

struct StepInfo {
  bool low_speed_blend = false;  // kinematic fallback contributed
  bool guard_fallback = false;   // dynamic-row denominator underflow
};

namespace detail {

constexpr double kDenomEps = 1e-6;

// Share of the dynamic rows at this longitudinal speed, in [0, 1].
inline double dynamic_share(double vx, const VehicleParams& p) {
  return std::clamp((vx - p.vx_blend_low) / (p.vx_blend_high - p.vx_blend_low), 0.0, 1.0);
}

}  // namespace detail

// One step of the discrete dynamic bicycle model. Throws on non-finite
// input; the low-speed kinematic blend is reported through `info`.
inline VehicleState step(const VehicleState& x, const ControlInput& u, const VehicleParams& p,
                         StepInfo* info = nullptr) {
  if (!x.all_finite()) {
    std::ostringstream os;
    os << "step: non-finite state (" << x.px << ", " << x.py << ", " << x.phi << ", " << x.vx
       << ", " << x.vy << ", " << x.omega << ")";
    throw std::invalid_argument(os.str());
  }
  if (!u.all_finite()) throw std::invalid_argument("step: non-finite control");

  const double dt = p.dt;
  const double c = std::cos(x.phi), sn = std::sin(x.phi);

  VehicleState n;
  n.px = x.px + (x.vx * c - x.vy * sn) * dt;
  n.py = x.py + (x.vy * c + x.vx * sn) * dt;
  n.phi = wrap_angle(x.phi + x.omega * dt);
  // no reverse gear: braking saturates at standstill
  n.vx = std::max(x.vx + u.accel * dt, 0.0);

  const double s = detail::dynamic_share(x.vx, p);
  const double omega_kin = x.vx * std::tan(u.steer) / p.wheelbase();

  double vy_dyn = 0.0, omega_dyn = 0.0;
  bool guard = false;
  if (s > 0.0) {
    const double d5 = p.mass * x.vx - (p.kf + p.kr) * dt;
    const double d6 = p.iz * x.vx - (p.lf * p.lf * p.kf + p.lr * p.lr * p.kr) * dt;
    if (std::abs(d5) < detail::kDenomEps || std::abs(d6) < detail::kDenomEps) {
      guard = true;
    } else {
      vy_dyn = (p.mass * x.vx * x.vy + p.l * x.omega * dt - p.kf * u.steer * x.vx * dt -
                p.mass * x.vx * x.vx * x.omega * dt) /
               d5;
      omega_dyn = (p.iz * x.vx * x.omega + p.l * x.vy * dt - p.lf * p.kf * u.steer * x.vx * dt) /
                  d6;
    }
  }

  if (s >= 1.0 && !guard) {
    n.vy = vy_dyn;
    n.omega = omega_dyn;
  } else if (s <= 0.0 || guard) {
    n.vy = 0.0;
    n.omega = omega_kin;
    if (info) info->low_speed_blend = true;
  } else {
    n.vy = s * vy_dyn;
    n.omega = s * omega_dyn + (1.0 - s) * omega_kin;
    if (info) info->low_speed_blend = true;
  }
  if (info) info->guard_fallback = guard;
  return n;
}

// Propagates state0 through a control sequence; result[0] == state0.
inline std::vector<VehicleState> rollout(const VehicleState& state0,
                                         const std::vector<ControlInput>& controls,
                                         const VehicleParams& p) {
  if (controls.empty()) throw std::invalid_argument("rollout: empty control sequence");
  std::vector<VehicleState> states;
  states.reserve(controls.size() + 1);
  states.push_back(state0);
  for (std::size_t k = 0; k < controls.size(); ++k) {
    try {
      states.push_back(step(states.back(), controls[k], p));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("rollout: step " + std::to_string(k) + ": " + e.what());
    }
  }
  return states;
}

// Analytic A = df/dx (6x6) and B = df/du (6x2) of step(), including the
// low-speed blend term.
inline void jacobians(const VehicleState& x, const ControlInput& u, const VehicleParams& p,
                      Matrix6d& A, Matrix62d& B) {
  if (!x.all_finite() || !u.all_finite())
    throw std::invalid_argument("jacobians: non-finite input");

  const double dt = p.dt;
  const double c = std::cos(x.phi), sn = std::sin(x.phi);

  A.setZero();
  B.setZero();

  A(0, 0) = 1.0;
  A(0, 2) = (-x.vx * sn - x.vy * c) * dt;
  A(0, 3) = c * dt;
  A(0, 4) = -sn * dt;

  A(1, 1) = 1.0;
  A(1, 2) = (-x.vy * sn + x.vx * c) * dt;
  A(1, 3) = sn * dt;
  A(1, 4) = c * dt;

  A(2, 2) = 1.0;
  A(2, 5) = dt;

  if (x.vx + u.accel * dt >= 0.0) {  // standstill clamp inactive
    A(3, 3) = 1.0;
    B(3, 0) = dt;
  }

  const double s = detail::dynamic_share(x.vx, p);
  const double ds = (x.vx > p.vx_blend_low && x.vx < p.vx_blend_high)
                        ? 1.0 / (p.vx_blend_high - p.vx_blend_low)
                        : 0.0;

  const double tan_d = std::tan(u.steer);
  const double sec2 = 1.0 + tan_d * tan_d;
  const double wb = p.wheelbase();
  const double omega_kin = x.vx * tan_d / wb;
  const double domk_dvx = tan_d / wb;
  const double domk_dsteer = x.vx * sec2 / wb;

  double vy_dyn = 0.0, omega_dyn = 0.0;
  double dvy_dvx = 0.0, dvy_dvy = 0.0, dvy_dom = 0.0, dvy_dsteer = 0.0;
  double dom_dvx = 0.0, dom_dvy = 0.0, dom_dom = 0.0, dom_dsteer = 0.0;
  bool guard = false;

  if (s > 0.0) {
    const double d5 = p.mass * x.vx - (p.kf + p.kr) * dt;
    const double d6 = p.iz * x.vx - (p.lf * p.lf * p.kf + p.lr * p.lr * p.kr) * dt;
    if (std::abs(d5) < detail::kDenomEps || std::abs(d6) < detail::kDenomEps) {
      guard = true;
    } else {
      const double n5 = p.mass * x.vx * x.vy + p.l * x.omega * dt - p.kf * u.steer * x.vx * dt -
                        p.mass * x.vx * x.vx * x.omega * dt;
      const double n6 = p.iz * x.vx * x.omega + p.l * x.vy * dt - p.lf * p.kf * u.steer * x.vx * dt;
      vy_dyn = n5 / d5;
      omega_dyn = n6 / d6;

      dvy_dvx = ((p.mass * x.vy - p.kf * u.steer * dt - 2.0 * p.mass * x.vx * x.omega * dt) * d5 -
                 n5 * p.mass) /
                (d5 * d5);
      dvy_dvy = p.mass * x.vx / d5;
      dvy_dom = (p.l * dt - p.mass * x.vx * x.vx * dt) / d5;
      dvy_dsteer = -p.kf * x.vx * dt / d5;

      dom_dvx = ((p.iz * x.omega - p.lf * p.kf * u.steer * dt) * d6 - n6 * p.iz) / (d6 * d6);
      dom_dvy = p.l * dt / d6;
      dom_dom = p.iz * x.vx / d6;
      dom_dsteer = -p.lf * p.kf * x.vx * dt / d6;
    }
  }

  if (guard || s <= 0.0) {
    // kinematic rows: vy' = 0, omega' = vx tan(steer) / wheelbase
    A(5, 3) = domk_dvx;
    B(5, 1) = domk_dsteer;
    return;
  }

  A(4, 3) = s * dvy_dvx + ds * vy_dyn;
  A(4, 4) = s * dvy_dvy;
  A(4, 5) = s * dvy_dom;
  B(4, 1) = s * dvy_dsteer;

  A(5, 3) = s * dom_dvx + (1.0 - s) * domk_dvx + ds * (omega_dyn - omega_kin);
  A(5, 4) = s * dom_dvy;
  A(5, 5) = s * dom_dom;
  B(5, 1) = s * dom_dsteer + (1.0 - s) * domk_dsteer;
}

inline ControlInput clamp_control(const ControlInput& u, const VehicleParams& p) {
  return {std::clamp(u.accel, p.u_min.accel, p.u_max.accel),
          std::clamp(u.steer, p.u_min.steer, p.u_max.steer)};
}

}  // namespace pfmpc
