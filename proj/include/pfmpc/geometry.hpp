#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pfmpc {

using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

struct PolylineProjection {
  double arc_s = 0.0;     // arc-length coordinate of the closest point
  double distance = 0.0;  // euclidean distance to the closest point
  Vec2 point{0.0, 0.0};
};

// Piecewise-linear path with arc-length queries.
class Polyline {
 public:
  Polyline() = default;

  explicit Polyline(std::vector<Vec2> pts) : pts_(std::move(pts)) {
    if (pts_.size() < 2) throw std::invalid_argument("polyline needs at least 2 points");
    cum_.resize(pts_.size());
    cum_[0] = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i)
      cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
  }

  const std::vector<Vec2>& points() const { return pts_; }
  double length() const { return cum_.back(); }

  // Closest point over all segments; arc_s is clamped to [0, length].
  PolylineProjection project(const Vec2& p) const {
    PolylineProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      const Vec2 a = pts_[i], b = pts_[i + 1];
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const Vec2 q = a + t * ab;
      const double d = (p - q).norm();
      if (d < best.distance) {
        best.distance = d;
        best.point = q;
        best.arc_s = cum_[i] + t * std::sqrt(len2);
      }
    }
    return best;
  }

  // Point at arc length s; clamps at the ends.
  Vec2 point_at(double s) const {
    if (s <= 0.0) return pts_.front();
    if (s >= length()) return pts_.back();
    const std::size_t i = segment_index(s);
    const double t = (s - cum_[i]) / (cum_[i + 1] - cum_[i]);
    return pts_[i] + t * (pts_[i + 1] - pts_[i]);
  }

  // Unit tangent of the segment containing s.
  Vec2 direction_at(double s) const {
    std::size_t i = s >= length() ? pts_.size() - 2 : segment_index(std::max(s, 0.0));
    Vec2 d = pts_[i + 1] - pts_[i];
    const double n = d.norm();
    return n > 0.0 ? Vec2(d / n) : Vec2(1.0, 0.0);
  }

 private:
  std::size_t segment_index(double s) const {
    std::size_t lo = 0, hi = cum_.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      (cum_[mid] <= s ? lo : hi) = mid;
    }
    return lo;
  }

  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

// Oriented rectangle used for footprints and collision tests.
struct OrientedBox {
  Vec2 center{0.0, 0.0};
  double heading = 0.0;
  double length = 1.0;  // extent along heading
  double width = 1.0;

  std::array<Vec2, 4> corners() const {
    const Vec2 ax = rotate({1.0, 0.0}, heading) * (0.5 * length);
    const Vec2 ay = rotate({0.0, 1.0}, heading) * (0.5 * width);
    return {center + ax + ay, center + ax - ay, center - ax - ay, center - ax + ay};
  }
};

namespace detail {

inline std::pair<double, double> project_onto(const std::array<Vec2, 4>& pts, const Vec2& axis) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& p : pts) {
    const double v = p.dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  return (p - (a + std::clamp(t, 0.0, 1.0) * ab)).norm();
}

}  // namespace detail

// Separating-axis test for two oriented boxes. Touching counts as overlap.
inline bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners(), cb = b.corners();
  const std::array<Vec2, 4> axes = {rotate({1.0, 0.0}, a.heading), rotate({0.0, 1.0}, a.heading),
                                    rotate({1.0, 0.0}, b.heading), rotate({0.0, 1.0}, b.heading)};
  for (const Vec2& axis : axes) {
    const auto [alo, ahi] = detail::project_onto(ca, axis);
    const auto [blo, bhi] = detail::project_onto(cb, axis);
    if (ahi < blo || bhi < alo) return false;
  }
  return true;
}

// Clearance between box boundaries; 0 when overlapping.
inline double box_distance(const OrientedBox& a, const OrientedBox& b) {
  if (boxes_overlap(a, b)) return 0.0;
  const auto ca = a.corners(), cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, detail::point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, detail::point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

// Proper intersection test between segments [a0,a1] and [b0,b1].
inline bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  const double d1 = cross(a1 - a0, b0 - a0);
  const double d2 = cross(a1 - a0, b1 - a0);
  const double d3 = cross(b1 - b0, a0 - b0);
  const double d4 = cross(b1 - b0, a1 - b0);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace pfmpc
