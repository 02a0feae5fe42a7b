#pragma once

// Direct and inverse kinematics of the planar revolute-revolute arm. The
// shoulder J1 sits at the origin, the elbow J2 joins link 1 and link 2, and
// the endpoint P is the tip of link 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"

namespace torusarm {

struct ArmGeometry {
  double l1 = 1.0;
  double l2 = 1.0;

  double reach() const { return l1 + l2; }
  double inner_radius() const { return std::abs(l1 - l2); }

  void validate() const {
    if (!(std::isfinite(l1) && l1 > 0.0) || !(std::isfinite(l2) && l2 > 0.0)) {
      throw Error(ErrorCode::ValidationError, "arm link lengths must be finite and > 0");
    }
  }

  friend bool operator==(const ArmGeometry&, const ArmGeometry&) = default;
};

struct ArmPose {
  Point2 shoulder;
  Point2 elbow;
  Point2 endpoint;
};

inline constexpr double kReachTolerance = 1e-9;

inline Point2 elbow_position(const ArmGeometry& arm, Angle theta1) {
  return {arm.l1 * std::cos(theta1.rad()), arm.l1 * std::sin(theta1.rad())};
}

inline ArmPose forward(const ArmGeometry& arm, const Configuration& q) {
  const Point2 elbow = elbow_position(arm, q.theta1);
  const double outer = q.theta1.rad() + q.theta2.rad();
  return {{0.0, 0.0}, elbow, {elbow.x + arm.l2 * std::cos(outer), elbow.y + arm.l2 * std::sin(outer)}};
}

inline bool reachable(const ArmGeometry& arm, Point2 p) {
  const double r = norm(p);
  return r <= arm.reach() + kReachTolerance && r >= arm.inner_radius() - kReachTolerance;
}

/// Both inverse-kinematics branches. `count` is 1 at the annulus boundary
/// (the branches coincide) and 2 otherwise. solutions[0] is the branch with
/// theta2 in [0, pi].
struct IkSolutions {
  std::array<Configuration, 2> solutions;
  int count = 0;
};

/// `theta1_if_degenerate` is used when p is the origin and l1 == l2 (any
/// shoulder angle folds the endpoint onto the shoulder).
inline IkSolutions inverse_branches(const ArmGeometry& arm, Point2 p, Angle theta1_if_degenerate = Angle{}) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw Error(ErrorCode::InvalidArgument, "inverse: non-finite target point");
  }
  if (!reachable(arm, p)) {
    throw Error(ErrorCode::Unreachable, "inverse: point outside the reachable annulus");
  }
  const double l1 = arm.l1;
  const double l2 = arm.l2;
  const double r2 = p.x * p.x + p.y * p.y;
  double c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  c2 = std::clamp(c2, -1.0, 1.0);
  // sin from the factored form stays accurate near both annulus rims
  const double outer = (l1 + l2) * (l1 + l2) - r2;
  const double inner = r2 - (l1 - l2) * (l1 - l2);
  const double s2 = std::sqrt(std::max(0.0, outer) * std::max(0.0, inner)) / (2.0 * l1 * l2);
  const double elbow = std::atan2(s2, c2);  // arccos branch, in [0, pi]

  IkSolutions out;
  auto shoulder_for = [&](double th2) {
    if (r2 == 0.0 || std::sqrt(r2) < 1e-12) return theta1_if_degenerate.rad();
    return std::atan2(p.y, p.x) - std::atan2(l2 * std::sin(th2), l1 + l2 * std::cos(th2));
  };
  out.solutions[0] = Configuration{shoulder_for(elbow), elbow};
  out.count = 1;
  if (s2 > 0.0) {
    out.solutions[1] = Configuration{shoulder_for(-elbow), -elbow};
    out.count = 2;
  }
  return out;
}

/// Inverse kinematics resolved against the current configuration: the branch
/// needing the smaller summed joint motion from `hint` wins, ties go to the
/// theta2 in [0, pi] branch.
inline Configuration inverse(const ArmGeometry& arm, Point2 p, const Configuration& hint) {
  const IkSolutions ik = inverse_branches(arm, p, hint.theta1);
  if (ik.count == 1) return ik.solutions[0];
  const double cost0 = torus_geodesic(hint, ik.solutions[0]).norm_l1();
  const double cost1 = torus_geodesic(hint, ik.solutions[1]).norm_l1();
  return cost1 < cost0 ? ik.solutions[1] : ik.solutions[0];
}

/// Radial projection onto the reachable annulus. Points at the origin (when
/// the annulus has a hole) project along `fallback_direction`.
inline Point2 project_to_workspace(const ArmGeometry& arm, Point2 p, Point2 fallback_direction) {
  const double r = norm(p);
  const double lo = arm.inner_radius();
  const double hi = arm.reach();
  if (r >= lo && r <= hi) return p;
  Point2 dir = r > 0.0 ? (1.0 / r) * p : fallback_direction;
  const double dn = norm(dir);
  dir = dn > 0.0 ? (1.0 / dn) * dir : Point2{1.0, 0.0};
  return (r > hi ? hi : lo) * dir;
}

}  // namespace torusarm
