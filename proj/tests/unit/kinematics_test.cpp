#include <gtest/gtest.h>

#include <numbers>

#include "support/oracles.hpp"
#include "torusarm/kinematics.hpp"

using namespace torusarm;
constexpr double kPi = std::numbers::pi;

namespace {

const ArmGeometry kUnit{1.0, 1.0};

void expect_point(Point2 p, double x, double y, double tol = 1e-12) {
  EXPECT_NEAR(p.x, x, tol);
  EXPECT_NEAR(p.y, y, tol);
}

double joint_error(const Configuration& a, const Configuration& b) {
  return std::max(oracle::wrapped_abs(a.theta1.rad() - b.theta1.rad()), oracle::wrapped_abs(a.theta2.rad() - b.theta2.rad()));
}

}  // namespace

TEST(Forward, Examples) {
  expect_point(forward(kUnit, {0, 0}).endpoint, 2, 0);
  expect_point(forward(kUnit, {kPi / 2, 0}).endpoint, 0, 2);
  expect_point(forward(kUnit, {0, kPi}).endpoint, 0, 0);
  expect_point(forward(kUnit, {kPi / 2, 0}).elbow, 0, 1);
}

TEST(Forward, PeriodicInEachJoint) {
  SeededRng rng(21);
  const ArmGeometry arm{1.3, 0.7};
  for (int k = 0; k < 1000; ++k) {
    const double a = rng.uniform(0, kTwoPi), b = rng.uniform(0, kTwoPi);
    const Point2 p = forward(arm, {a, b}).endpoint;
    expect_point(forward(arm, {a + kTwoPi, b}).endpoint, p.x, p.y, 1e-12);
    expect_point(forward(arm, {a, b + kTwoPi}).endpoint, p.x, p.y, 1e-12);
  }
}

TEST(Inverse, Examples) {
  const Configuration straight = inverse(kUnit, {2, 0}, {1.0, 2.0});
  EXPECT_NEAR(joint_error(straight, {0, 0}), 0, 1e-7);

  const Configuration a = inverse(kUnit, {1, 1}, {0.1, 1.4});
  EXPECT_NEAR(joint_error(a, {0, kPi / 2}), 0, 1e-12);
  const Configuration b = inverse(kUnit, {1, 1}, {1.5, 5.0});
  EXPECT_NEAR(joint_error(b, {kPi / 2, 3 * kPi / 2}), 0, 1e-12);
  // check both by substitution
  expect_point(forward(kUnit, a).endpoint, 1, 1);
  expect_point(forward(kUnit, b).endpoint, 1, 1);

  try {
    inverse(kUnit, {3, 0}, {});
    FAIL() << "expected Unreachable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unreachable);
  }
}

TEST(Inverse, BoundaryCollapsesToOneBranch) {
  EXPECT_EQ(inverse_branches(kUnit, {2, 0}).count, 1);
  const ArmGeometry uneven{1.0, 0.5};
  const auto inner = inverse_branches(uneven, {0.5, 0});
  EXPECT_EQ(inner.count, 1);
  expect_point(forward(uneven, inner.solutions[0]).endpoint, 0.5, 0, 1e-9);
}

TEST(Inverse, FoldedOriginKeepsHintShoulder) {
  const Configuration q = inverse(kUnit, {0, 0}, {1.25, 0.3});
  EXPECT_NEAR(q.theta1.rad(), 1.25, 1e-12);
  EXPECT_NEAR(q.theta2.rad(), kPi, 1e-12);
}

TEST(Inverse, ArctangentIsQuadrantAware) {
  for (const Point2 p : {Point2{-1, 0.5}, Point2{-1, -0.5}, Point2{0.3, -1.2}, Point2{-0.1, 1.7}}) {
    const auto ik = inverse_branches(kUnit, p);
    ASSERT_EQ(ik.count, 2);
    for (int b = 0; b < 2; ++b) expect_point(forward(kUnit, ik.solutions[b]).endpoint, p.x, p.y, 1e-12);
  }
}

TEST(Inverse, FirstBranchHasElbowInUpperHalf) {
  SeededRng rng(22);
  for (int k = 0; k < 1000; ++k) {
    const Point2 p = forward(kUnit, {rng.uniform(0, kTwoPi), rng.uniform(0.01, kTwoPi - 0.01)}).endpoint;
    if (!reachable(kUnit, p)) continue;
    const auto ik = inverse_branches(kUnit, p);
    ASSERT_LE(ik.solutions[0].theta2.rad(), kPi);
  }
}

TEST(Inverse, RoundTripWithHint) {
  SeededRng rng(23);
  const ArmGeometry arms[] = {{1, 1}, {1.5, 0.6}, {0.4, 1.1}};
  for (const auto& arm : arms) {
    for (int k = 0; k < 10000; ++k) {
      const Configuration q{rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi)};
      const Point2 p = forward(arm, q).endpoint;
      const double r = norm(p);
      if (r <= arm.inner_radius() + 1e-6 || r >= arm.reach() - 1e-6) continue;
      ASSERT_LE(joint_error(inverse(arm, p, q), q), 1e-9) << k;
    }
  }
}

TEST(Inverse, TieGoesToUpperBranch) {
  // hint equidistant (L1) from both branches of p = (1, 1)
  const auto ik = inverse_branches(kUnit, {1, 1});
  const Configuration s0 = ik.solutions[0], s1 = ik.solutions[1];
  const Configuration mid{(s0.theta1.rad() + s1.theta1.rad()) / 2 + kPi, (s0.theta2.rad() + s1.theta2.rad()) / 2};
  const double c0 = std::abs(angle_delta(mid.theta1, s0.theta1)) + std::abs(angle_delta(mid.theta2, s0.theta2));
  const double c1 = std::abs(angle_delta(mid.theta1, s1.theta1)) + std::abs(angle_delta(mid.theta2, s1.theta2));
  if (c0 == c1) {
    EXPECT_EQ(inverse(kUnit, {1, 1}, mid), s0);
  }
  EXPECT_EQ(inverse(kUnit, {1, 1}, s0), s0);
  EXPECT_EQ(inverse(kUnit, {1, 1}, s1), s1);
}

TEST(Reachable, Examples) {
  EXPECT_TRUE(reachable(kUnit, {0, 0}));
  EXPECT_TRUE(reachable(kUnit, {2, 0}));
  EXPECT_FALSE(reachable(kUnit, {2.001, 0}));
  const ArmGeometry uneven{1.0, 0.5};
  EXPECT_FALSE(reachable(uneven, {0.2, 0}));
  EXPECT_TRUE(reachable(uneven, {0.5, 0}));
}

TEST(ProjectToWorkspace, RadialProjection) {
  expect_point(project_to_workspace(kUnit, {4, 0}, {1, 0}), 2, 0);
  expect_point(project_to_workspace(kUnit, {1, 1}, {1, 0}), 1, 1);
  const ArmGeometry uneven{1.0, 0.5};
  expect_point(project_to_workspace(uneven, {0, 0.1}, {1, 0}), 0, 0.5);
  expect_point(project_to_workspace(uneven, {0, 0}, {0, -3}), 0, -0.5);
}
