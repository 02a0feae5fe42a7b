#pragma once

// Operator input to arm motion. Every mode produces a target configuration;
// the step toward it is clamped on the torus and accepted only if the
// resulting configuration is collision-free.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"
#include "torusarm/kinematics.hpp"
#include "torusarm/scenario.hpp"

namespace torusarm {

struct ControlMode {
  enum class Kind { Joint, Tip, CSpace };
  Kind kind = Kind::CSpace;
  int joint = 1;  // only meaningful for Joint

  static ControlMode joint_mode(int joint) {
    if (joint != 1 && joint != 2) throw Error(ErrorCode::InvalidArgument, "joint index must be 1 or 2");
    return {Kind::Joint, joint};
  }
  static ControlMode tip_mode() { return {Kind::Tip, 1}; }
  static ControlMode cspace_mode() { return {Kind::CSpace, 1}; }

  bool works_in_wspace() const { return kind != Kind::CSpace; }

  friend bool operator==(const ControlMode& a, const ControlMode& b) {
    return a.kind == b.kind && (a.kind != Kind::Joint || a.joint == b.joint);
  }
};

inline std::string to_string(const ControlMode& m) {
  switch (m.kind) {
    case ControlMode::Kind::Joint: return m.joint == 1 ? "joint1" : "joint2";
    case ControlMode::Kind::Tip: return "tip";
    case ControlMode::Kind::CSpace: return "cspace";
  }
  return "cspace";
}

inline ControlMode parse_mode(std::string_view s) {
  if (s == "joint1") return ControlMode::joint_mode(1);
  if (s == "joint2") return ControlMode::joint_mode(2);
  if (s == "tip") return ControlMode::tip_mode();
  if (s == "cspace") return ControlMode::cspace_mode();
  throw Error(ErrorCode::InvalidArgument, "unknown control mode '" + std::string(s) + "'");
}

inline constexpr double kDefaultMaxStep = 0.05;

struct StepLimit {
  double max_step = kDefaultMaxStep;

  void validate() const {
    if (!(std::isfinite(max_step) && max_step > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "max_step must be finite and > 0");
    }
  }
};

struct StepOutcome {
  bool accepted = false;
  Configuration q_new;
  std::optional<Configuration> rejected_q;
};

// pointers closer than this to the pivot have no usable direction
inline constexpr double kPivotEpsilon = 1e-12;

/// Selected joint turns so that its link points at the pointer.
inline Configuration joint_mode_target(const ArmGeometry& arm, const Configuration& q, int joint, Point2 pointer) {
  if (!std::isfinite(pointer.x) || !std::isfinite(pointer.y)) {
    throw Error(ErrorCode::InvalidArgument, "joint mode: non-finite pointer");
  }
  if (joint == 1) {
    if (norm(pointer) <= kPivotEpsilon) throw Error(ErrorCode::DegeneratePointer, "pointer on the shoulder");
    return {Angle{std::atan2(pointer.y, pointer.x)}, q.theta2};
  }
  if (joint != 2) throw Error(ErrorCode::InvalidArgument, "joint index must be 1 or 2");
  const Point2 elbow = elbow_position(arm, q.theta1);
  const Point2 d = pointer - elbow;
  if (norm(d) <= kPivotEpsilon) throw Error(ErrorCode::DegeneratePointer, "pointer on the elbow");
  return {q.theta1, Angle{std::atan2(d.y, d.x) - q.theta1.rad()}};
}

/// Endpoint follows the pointer; throws Unreachable outside the annulus.
inline Configuration tip_mode_target(const ArmGeometry& arm, const Configuration& q, Point2 pointer) {
  return inverse(arm, pointer, q);
}

inline Configuration cspace_mode_target(const Configuration& /*q*/, const Configuration& c_pointer) { return c_pointer; }

inline Configuration clamp_step(const Configuration& q, const Configuration& target, const StepLimit& limit) {
  limit.validate();
  const GeodesicDelta d = torus_geodesic(q, target);
  const double len = d.norm_l2();
  if (len <= limit.max_step) return target;
  return advance(q, d, limit.max_step / len);
}

/// Endpoint gate. With `substeps` > 0 that many evenly spaced intermediate
/// configurations are tested as well.
inline StepOutcome apply_step(const Scenario& scenario, const Configuration& q, const Configuration& candidate,
                              int substeps = 0) {
  bool blocked = scenario.collides(candidate);
  if (!blocked && substeps > 0) {
    const GeodesicDelta d = torus_geodesic(q, candidate);
    for (int k = 1; k <= substeps && !blocked; ++k) {
      blocked = scenario.collides(advance(q, d, static_cast<double>(k) / (substeps + 1)));
    }
  }
  if (blocked) return {false, q, candidate};
  return {true, candidate, std::nullopt};
}

/// Single-writer controller for one arm. Pointer calls return the outcome of
/// the one clamped step they produce.
class Controller {
 public:
  Controller(Scenario scenario, StepLimit limit = {}, int substeps = 0)
      : scenario_(std::move(scenario)), limit_(limit), substeps_(substeps), q_(scenario_.start) {
    limit_.validate();
  }

  const Scenario& scenario() const { return scenario_; }
  const Configuration& q() const { return q_; }
  const ControlMode& mode() const { return mode_; }
  const StepLimit& limit() const { return limit_; }

  void set_mode(const ControlMode& m) { mode_ = m; }
  void reset(const Configuration& q) { q_ = q; }

  /// Work-space pointer for joint and tip modes. Tip-mode pointers outside
  /// the reachable annulus are projected onto it.
  StepOutcome pointer_w(Point2 pointer) {
    if (!mode_.works_in_wspace()) throw Error(ErrorCode::InvalidArgument, "work-space pointer in C-space mode");
    Configuration target;
    if (mode_.kind == ControlMode::Kind::Joint) {
      target = joint_mode_target(scenario_.arm, q_, mode_.joint, pointer);
    } else {
      if (!std::isfinite(pointer.x) || !std::isfinite(pointer.y)) {
        throw Error(ErrorCode::InvalidArgument, "tip mode: non-finite pointer");
      }
      const Point2 tip = forward(scenario_.arm, q_).endpoint;
      target = tip_mode_target(scenario_.arm, q_, project_to_workspace(scenario_.arm, pointer, tip));
    }
    return step_toward(target);
  }

  StepOutcome pointer_c(const Configuration& c_pointer) {
    if (mode_.kind != ControlMode::Kind::CSpace) throw Error(ErrorCode::InvalidArgument, "C-space pointer in work-space mode");
    return step_toward(cspace_mode_target(q_, c_pointer));
  }

 private:
  StepOutcome step_toward(const Configuration& target) {
    const StepOutcome out = apply_step(scenario_, q_, clamp_step(q_, target, limit_), substeps_);
    q_ = out.q_new;
    return out;
  }

  Scenario scenario_;
  StepLimit limit_;
  int substeps_ = 0;
  Configuration q_;
  ControlMode mode_ = ControlMode::cspace_mode();
};

}  // namespace torusarm
