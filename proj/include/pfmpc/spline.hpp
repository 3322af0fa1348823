#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pfmpc/geometry.hpp"

namespace pfmpc {

// Catmull-Rom interpolating spline on chord-length knots: a C1 cubic that
// passes through every control point. Queries are by arc length, served
// from a dense lookup table.
class CatmullRomSpline {
 public:
  explicit CatmullRomSpline(const std::vector<Vec2>& waypoints, double table_step = 0.05) {
    pts_ = dedupe(waypoints);
    if (pts_.size() < 2) throw std::invalid_argument("spline needs at least 2 distinct waypoints");

    knots_.resize(pts_.size());
    knots_[0] = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i)
      knots_[i] = knots_[i - 1] + (pts_[i] - pts_[i - 1]).norm();

    // one-sided tangents at the ends, central elsewhere
    tangents_.resize(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == pts_.size() ? i : i + 1;
      tangents_[i] = (pts_[hi] - pts_[lo]) / (knots_[hi] - knots_[lo]);
    }

    build_arc_table(table_step);
  }

  double chord_length() const { return knots_.back(); }
  double arc_length() const { return arc_.back(); }
  const std::vector<Vec2>& control_points() const { return pts_; }
  const std::vector<double>& knot_parameters() const { return knots_; }

  // Position at chord parameter t (the knot parameterization).
  Vec2 position_at_parameter(double t) const { return eval(t).p; }

  Vec2 position_at_arc(double s) const { return eval(param_at_arc(s)).p; }

  double heading_at_arc(double s) const {
    const Derivs d = eval(param_at_arc(s));
    return std::atan2(d.d1.y(), d.d1.x());
  }

  // Signed curvature kappa = (x'y'' - y'x'') / |g'|^3.
  double curvature_at_arc(double s) const {
    const Derivs d = eval(param_at_arc(s));
    const double speed = d.d1.norm();
    if (speed < 1e-12) return 0.0;
    return (d.d1.x() * d.d2.y() - d.d1.y() * d.d2.x()) / (speed * speed * speed);
  }

  Vec2 end_point() const { return pts_.back(); }
  Vec2 end_direction() const {
    const Derivs d = eval(knots_.back());
    const double n = d.d1.norm();
    return n > 1e-12 ? Vec2(d.d1 / n) : Vec2(1.0, 0.0);
  }

  // Arc-length coordinate of the closest point to p (table resolution,
  // refined by local ternary search).
  double project_arc(const Vec2& p) const {
    std::size_t best = 0;
    double best_d2 = (table_pts_[0] - p).squaredNorm();
    for (std::size_t i = 1; i < table_pts_.size(); ++i) {
      const double d2 = (table_pts_[i] - p).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    double lo = table_t_[best > 0 ? best - 1 : 0];
    double hi = table_t_[std::min(best + 1, table_t_.size() - 1)];
    for (int it = 0; it < 60; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if ((eval(m1).p - p).squaredNorm() < (eval(m2).p - p).squaredNorm())
        hi = m2;
      else
        lo = m1;
    }
    return arc_at_param(0.5 * (lo + hi));
  }

 private:
  struct Derivs {
    Vec2 p, d1, d2;
  };

  static std::vector<Vec2> dedupe(const std::vector<Vec2>& in) {
    std::vector<Vec2> out;
    for (const Vec2& p : in)
      if (out.empty() || (p - out.back()).norm() > 1e-9) out.push_back(p);
    return out;
  }

  // Cubic Hermite on [knots_[i], knots_[i+1]].
  Derivs eval(double t) const {
    t = std::clamp(t, knots_.front(), knots_.back());
    std::size_t i = segment_index(t);
    const double h = knots_[i + 1] - knots_[i];
    const double u = (t - knots_[i]) / h;
    const Vec2 p0 = pts_[i], p1 = pts_[i + 1];
    const Vec2 m0 = tangents_[i] * h, m1 = tangents_[i + 1] * h;

    const double u2 = u * u, u3 = u2 * u;
    Derivs d;
    d.p = (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 +
          (u3 - u2) * m1;
    d.d1 = ((6 * u2 - 6 * u) * p0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * p1 +
            (3 * u2 - 2 * u) * m1) /
           h;
    d.d2 = ((12 * u - 6) * p0 + (6 * u - 4) * m0 + (-12 * u + 6) * p1 + (6 * u - 2) * m1) /
           (h * h);
    return d;
  }

  std::size_t segment_index(double t) const {
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      (knots_[mid] <= t ? lo : hi) = mid;
    }
    return lo;
  }

  void build_arc_table(double target_step) {
    const std::size_t n = std::max<std::size_t>(
        32, static_cast<std::size_t>(std::ceil(chord_length() / target_step)));
    table_t_.resize(n + 1);
    table_pts_.resize(n + 1);
    arc_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      table_t_[i] = chord_length() * static_cast<double>(i) / static_cast<double>(n);
      table_pts_[i] = eval(table_t_[i]).p;
    }
    arc_[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      arc_[i] = arc_[i - 1] + (table_pts_[i] - table_pts_[i - 1]).norm();
  }

  double param_at_arc(double s) const {
    s = std::clamp(s, 0.0, arc_.back());
    const auto it = std::lower_bound(arc_.begin(), arc_.end(), s);
    if (it == arc_.begin()) return table_t_.front();
    const std::size_t i = static_cast<std::size_t>(it - arc_.begin());
    const double span = arc_[i] - arc_[i - 1];
    const double w = span > 0.0 ? (s - arc_[i - 1]) / span : 0.0;
    return table_t_[i - 1] + w * (table_t_[i] - table_t_[i - 1]);
  }

  double arc_at_param(double t) const {
    t = std::clamp(t, 0.0, chord_length());
    const auto it = std::lower_bound(table_t_.begin(), table_t_.end(), t);
    if (it == table_t_.begin()) return arc_.front();
    const std::size_t i = static_cast<std::size_t>(it - table_t_.begin());
    const double span = table_t_[i] - table_t_[i - 1];
    const double w = span > 0.0 ? (t - table_t_[i - 1]) / span : 0.0;
    return arc_[i - 1] + w * (arc_[i] - arc_[i - 1]);
  }

  std::vector<Vec2> pts_;
  std::vector<double> knots_;
  std::vector<Vec2> tangents_;
  std::vector<double> table_t_;
  std::vector<Vec2> table_pts_;
  std::vector<double> arc_;
};

}  // namespace pfmpc
