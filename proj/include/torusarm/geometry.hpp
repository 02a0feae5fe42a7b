#pragma once

// Angle arithmetic on the flat two-torus and the planar primitives used for
// contact tests (points, segments, simple polygons, circles).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "torusarm/error.hpp"

namespace torusarm {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces any finite angle into [0, 2pi). Throws on NaN/inf.
inline double wrap_angle(double raw) {
  if (!std::isfinite(raw)) {
    throw Error(ErrorCode::InvalidArgument, "wrap_angle: non-finite angle");
  }
  double r = std::fmod(raw, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number plus 2pi can round up to exactly 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Joint angle, always canonical in [0, 2pi).
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : value_(wrap_angle(radians)) {}

  constexpr double rad() const noexcept { return value_; }

  friend constexpr bool operator==(Angle, Angle) = default;

 private:
  double value_ = 0.0;
};

/// Shortest signed difference to - from, in (-pi, pi]. The antipodal tie
/// resolves to +pi.
inline double angle_delta(Angle from, Angle to) {
  double d = to.rad() - from.rad();
  if (d > std::numbers::pi) {
    d -= kTwoPi;
  } else if (d <= -std::numbers::pi) {
    d += kTwoPi;
  }
  return d;
}

/// Arm configuration (theta1 = shoulder, theta2 = elbow); a point on the torus.
struct Configuration {
  Angle theta1;
  Angle theta2;

  Configuration() = default;
  Configuration(Angle a, Angle b) : theta1(a), theta2(b) {}
  Configuration(double a, double b) : theta1(a), theta2(b) {}

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct GeodesicDelta {
  double d1 = 0.0;
  double d2 = 0.0;

  double norm_l1() const { return std::abs(d1) + std::abs(d2); }
  double norm_l2() const { return std::hypot(d1, d2); }
  double norm_linf() const { return std::max(std::abs(d1), std::abs(d2)); }
};

/// Component-wise shortest displacement between two configurations.
inline GeodesicDelta torus_geodesic(const Configuration& from, const Configuration& to) {
  return {angle_delta(from.theta1, to.theta1), angle_delta(from.theta2, to.theta2)};
}

/// Configuration reached by moving `t` of the way along a displacement.
inline Configuration advance(const Configuration& q, const GeodesicDelta& d, double t = 1.0) {
  return {q.theta1.rad() + t * d.d1, q.theta2.rad() + t * d.d2};
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Degenerate a == b is allowed and behaves as a point.
struct Segment {
  Point2 a;
  Point2 b;
};

struct Polygon {
  std::vector<Point2> vertices;
};

struct Circle {
  Point2 center;
  double radius = 0.0;
};

struct Obstacle {
  std::variant<Polygon, Circle> shape;

  bool is_circle() const { return std::holds_alternative<Circle>(shape); }
};

namespace detail {

inline int orientation_sign(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

// c lies within the bounding box of ab; only meaningful when a, b, c are collinear
inline bool within_box(Point2 a, Point2 b, Point2 c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
}

}  // namespace detail

/// Closed segments: touching at an endpoint or overlapping collinearly counts.
inline bool segments_intersect(const Segment& s, const Segment& t) {
  using detail::orientation_sign;
  using detail::within_box;
  const int o1 = orientation_sign(s.a, s.b, t.a);
  const int o2 = orientation_sign(s.a, s.b, t.b);
  const int o3 = orientation_sign(t.a, t.b, s.a);
  const int o4 = orientation_sign(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(s.a, s.b, t.a)) return true;
  if (o2 == 0 && within_box(s.a, s.b, t.b)) return true;
  if (o3 == 0 && within_box(t.a, t.b, s.a)) return true;
  if (o4 == 0 && within_box(t.a, t.b, s.b)) return true;
  return false;
}

inline double point_segment_distance(Point2 p, const Segment& s) {
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

inline double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

/// Closed point-in-polygon (boundary counts as inside).
inline bool point_in_polygon(Point2 p, std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = poly[j];
    const Point2 b = poly[i];
    if (detail::orientation_sign(a, b, p) == 0 && detail::within_box(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline bool point_in_obstacle(Point2 p, const Obstacle& o) {
  if (const auto* c = std::get_if<Circle>(&o.shape)) {
    return distance(p, c->center) <= c->radius;
  }
  return point_in_polygon(p, std::get<Polygon>(o.shape).vertices);
}

/// True iff the segment, inflated by `inflation` (capsule radius), touches
/// the closed obstacle.
inline bool segment_within(const Segment& s, const Obstacle& o, double inflation) {
  if (const auto* c = std::get_if<Circle>(&o.shape)) {
    return point_segment_distance(c->center, s) <= c->radius + inflation;
  }
  const auto& v = std::get<Polygon>(o.shape).vertices;
  if (point_in_polygon(s.a, v)) return true;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Segment edge{v[j], v[i]};
    if (inflation == 0.0) {
      if (segments_intersect(s, edge)) return true;
    } else if (segment_segment_distance(s, edge) <= inflation) {
      return true;
    }
  }
  return false;
}

/// Closed-set contact between a segment and an obstacle.
inline bool segment_intersects_obstacle(const Segment& s, const Obstacle& o) {
  return segment_within(s, o, 0.0);
}

/// Reason the obstacle is invalid, or nothing when it is well formed.
inline std::optional<std::string> obstacle_defect(const Obstacle& o) {
  if (const auto* c = std::get_if<Circle>(&o.shape)) {
    if (!std::isfinite(c->center.x) || !std::isfinite(c->center.y) || !std::isfinite(c->radius)) {
      return "circle has non-finite coordinates";
    }
    if (!(c->radius > 0.0)) return "circle radius must be > 0";
    return std::nullopt;
  }
  const auto& v = std::get<Polygon>(o.shape).vertices;
  if (v.size() < 3) return "polygon needs at least 3 vertices";
  for (const auto& p : v) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return "polygon has non-finite vertex";
  }
  double twice_area = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) twice_area += cross(v[j], v[i]);
  if (twice_area == 0.0) return "polygon has zero area";
  // simplicity: non-adjacent edges are disjoint, adjacent edges share only their vertex
  for (std::size_t i = 0; i < n; ++i) {
    const Segment ei{v[i], v[(i + 1) % n]};
    if (ei.a == ei.b) return "polygon has a repeated vertex";
    for (std::size_t j = i + 1; j < n; ++j) {
      const Segment ej{v[j], v[(j + 1) % n]};
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_intersect(ei, ej)) return "polygon is not simple (edges cross)";
        continue;
      }
      // adjacent edges folding back over each other
      const Point2 shared = (j == i + 1) ? ei.b : ei.a;
      const Point2 other_i = (j == i + 1) ? ei.a : ei.b;
      const Point2 other_j = (j == i + 1) ? ej.b : ej.a;
      if (detail::orientation_sign(other_i, shared, other_j) == 0 &&
          dot(other_i - shared, other_j - shared) > 0.0) {
        return "polygon is not simple (edges overlap)";
      }
    }
  }
  return std::nullopt;
}

}  // namespace torusarm
