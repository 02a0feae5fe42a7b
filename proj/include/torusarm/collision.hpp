#pragma once

// Contact predicate between the arm and the obstacle set. Link 1 runs from
// the shoulder to the elbow, link 2 from the elbow to the endpoint; with a
// nonzero width each link is a capsule of radius width / 2.

#include <cmath>
#include <span>

#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"
#include "torusarm/kinematics.hpp"

namespace torusarm {

struct LinkModel {
  double width = 0.0;

  double inflation() const { return 0.5 * width; }

  void validate() const {
    if (!std::isfinite(width) || width < 0.0) {
      throw Error(ErrorCode::ValidationError, "link width must be finite and >= 0");
    }
  }

  friend bool operator==(const LinkModel&, const LinkModel&) = default;
};

namespace detail {

inline bool any_contact(const Segment& link, double inflation, std::span<const Obstacle> obstacles) {
  for (const auto& o : obstacles) {
    if (segment_within(link, o, inflation)) return true;
  }
  return false;
}

}  // namespace detail

inline bool link1_collides(const ArmGeometry& arm, const LinkModel& links,
                           std::span<const Obstacle> obstacles, Angle theta1) {
  const Segment link{{0.0, 0.0}, elbow_position(arm, theta1)};
  return detail::any_contact(link, links.inflation(), obstacles);
}

inline bool link2_collides(const ArmGeometry& arm, const LinkModel& links,
                           std::span<const Obstacle> obstacles, const Configuration& q) {
  const ArmPose pose = forward(arm, q);
  return detail::any_contact({pose.elbow, pose.endpoint}, links.inflation(), obstacles);
}

/// Self-contact between the two links is not considered.
inline bool config_collides(const ArmGeometry& arm, const LinkModel& links,
                            std::span<const Obstacle> obstacles, const Configuration& q) {
  return link1_collides(arm, links, obstacles, q.theta1) || link2_collides(arm, links, obstacles, q);
}

}  // namespace torusarm
