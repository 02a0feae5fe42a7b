#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "torusarm/navigator.hpp"

using namespace torusarm;

namespace {

Configuration center(int n, int i, int j) { return {oracle::center_angle(n, i), oracle::center_angle(n, j)}; }

// Every waypoint is a free cell center and consecutive waypoints are king
// moves apart (with wraparound).
void expect_safe_walk(const CSpaceRaster& r, const PathResult& p) {
  const int n = r.n();
  ASSERT_FALSE(p.waypoints.empty());
  int pi = -1, pj = -1;
  for (const auto& w : p.waypoints) {
    const int i = oracle::cell_index(n, w.theta1.rad()), j = oracle::cell_index(n, w.theta2.rad());
    ASSERT_FALSE(r.occupied(i, j)) << i << "," << j;
    ASSERT_NEAR(w.theta1.rad(), oracle::center_angle(n, i), 1e-12);
    if (pi >= 0) {
      const int di = std::min((i - pi + n) % n, (pi - i + n) % n), dj = std::min((j - pj + n) % n, (pj - j + n) % n);
      ASSERT_LE(std::max(di, dj), 1);
      ASSERT_GE(di + dj, 1);
    }
    pi = i;
    pj = j;
  }
  double total = 0;
  for (std::size_t k = 1; k < p.waypoints.size(); ++k) {
    total += oracle::wrapped_abs(p.waypoints[k].theta1.rad() - p.waypoints[k - 1].theta1.rad()) +
             oracle::wrapped_abs(p.waypoints[k].theta2.rad() - p.waypoints[k - 1].theta2.rad());
  }
  EXPECT_NEAR(p.length, total, 1e-9);
}

std::pair<int, int> random_free(const CSpaceRaster& r, SeededRng& rng) {
  for (int k = 0; k < 100000; ++k) {
    const int i = rng.uniform_int(0, r.n() - 1), j = rng.uniform_int(0, r.n() - 1);
    if (!r.occupied(i, j)) return {i, j};
  }
  return {-1, -1};
}

}  // namespace

TEST(Bug1, EmptyRasterFollowsGeodesic) {
  const int n = 64;
  const CSpaceRaster r(n);
  SeededRng rng(51);
  for (int k = 0; k < 200; ++k) {
    const Configuration s{rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi)}, t{rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi)};
    const auto res = bug1(r, s, t);
    ASSERT_EQ(res.path.status, PathStatus::Reached);
    EXPECT_TRUE(res.trace.hit_points.empty());
    expect_safe_walk(r, res.path);
    const double geodesic = torus_geodesic(s, t).norm_l1();
    // cell snapping moves each endpoint by at most half a cell per axis
    EXPECT_LE(std::abs(res.path.length - geodesic), 2 * kTwoPi / n + 1e-9);
  }
}

TEST(Bug1, EmptyRasterWalkStaysOnDigitalLine) {
  const int n = 64;
  const CSpaceRaster r(n);
  const auto res = bug1(r, center(n, 60, 2), center(n, 10, 30));  // wraps in theta1, not in theta2
  ASSERT_EQ(res.path.status, PathStatus::Reached);
  const double di = 14, dj = 28;
  for (std::size_t k = 0; k < res.path.waypoints.size(); ++k) {
    const auto& w = res.path.waypoints[k];
    double x = oracle::cell_index(n, w.theta1.rad()) - 60.0;
    if (x < -32) x += n;
    const double y = oracle::cell_index(n, w.theta2.rad()) - 2.0;
    EXPECT_LE(std::abs(x * dj - y * di) / std::hypot(di, dj), 1.0) << k;
  }
}

TEST(Bug1, SameStartAndTargetIsZeroLength) {
  const CSpaceRaster r(32);
  const auto res = bug1(r, {1.0, 2.0}, {1.0, 2.0});
  EXPECT_EQ(res.path.status, PathStatus::Reached);
  EXPECT_EQ(res.path.length, 0.0);
  EXPECT_EQ(res.path.waypoints.size(), 1u);
}

TEST(Bug1, StartBlockedThrows) {
  CSpaceRaster r(16);
  r.set(3, 3, true);
  try {
    bug1(r, center(16, 3, 3), center(16, 8, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StartBlocked);
  }
  EXPECT_THROW(bfs_shortest(r, center(16, 3, 3), center(16, 8, 8)), Error);
}

TEST(Bug1, TargetInsideSoleObstacleIsUnreachableAfterOneLap) {
  const int n = 32;
  CSpaceRaster r(n);
  for (int j = 10; j < 20; ++j) {
    for (int i = 12; i < 22; ++i) r.set(i, j, true);
  }
  const auto res = bug1(r, center(n, 2, 15), center(n, 16, 15));
  EXPECT_EQ(res.path.status, PathStatus::Unreachable);
  ASSERT_EQ(res.trace.hit_points.size(), 1u);
  ASSERT_EQ(res.trace.circumnavigation_lengths.size(), 1u);
  // a 10x10 block is ringed by 36 orthogonal and 4 diagonal moves
  EXPECT_NEAR(res.trace.circumnavigation_lengths[0], 44 * kTwoPi / n, 1e-9);
  expect_safe_walk(r, res.path);
  EXPECT_EQ(bfs_shortest(r, center(n, 2, 15), center(n, 16, 15)).status, PathStatus::Unreachable);
}

TEST(Bug1, WalledOffTargetIsUnreachable) {
  // two full occupied columns split the torus into two bands
  const int n = 32;
  CSpaceRaster r(n);
  for (int j = 0; j < n; ++j) {
    r.set(5, j, true);
    r.set(20, j, true);
  }
  const auto b = bug1(r, center(n, 10, 3), center(n, 28, 30));
  EXPECT_EQ(b.path.status, PathStatus::Unreachable);
  expect_safe_walk(r, b.path);
  EXPECT_EQ(bfs_shortest(r, center(n, 10, 3), center(n, 28, 30)).status, PathStatus::Unreachable);
  // same band: reachable, across the theta2 seam
  EXPECT_EQ(bug1(r, center(n, 10, 3), center(n, 15, 30)).path.status, PathStatus::Reached);
}

TEST(Bug1, GoesAroundWrappedBand) {
  // a band that wraps in theta1 with one gap: the only way through is the gap
  const int n = 40;
  CSpaceRaster r(n);
  for (int i = 0; i < n; ++i) {
    if (i != 33) r.set(i, 20, true);
    if (i != 7) r.set(i, 5, true);
  }
  const auto s = center(n, 10, 12), t = center(n, 10, 28);
  const auto b = bug1(r, s, t);
  ASSERT_EQ(b.path.status, PathStatus::Reached);
  expect_safe_walk(r, b.path);
  const auto o = bfs_shortest(r, s, t);
  ASSERT_EQ(o.status, PathStatus::Reached);
  EXPECT_LE(o.length, b.path.length + 1e-9);
}

TEST(Bug1, HitAndLeavePointsAreFreeCells) {
  const auto r = oracle::random_raster(52, 48, 6);
  SeededRng rng(53);
  for (int k = 0; k < 40; ++k) {
    const auto [si, sj] = random_free(r, rng);
    const auto [ti, tj] = random_free(r, rng);
    const auto res = bug1(r, center(48, si, sj), center(48, ti, tj));
    for (const auto& q : res.trace.hit_points) ASSERT_TRUE(is_free(r, q));
    for (const auto& q : res.trace.leave_points) ASSERT_TRUE(is_free(r, q));
    EXPECT_EQ(res.trace.circumnavigation_lengths.size(), res.trace.hit_points.size());
  }
}

TEST(Planners, AgreeWithFloodFillOnRandomRasters) {
  int reached = 0, unreachable = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const int n = 16 + static_cast<int>(seed % 5) * 12;
    const auto r = oracle::random_raster(seed, n, 2 + static_cast<int>(seed % 9), (seed % 4 == 0) ? 0.2 : 0.0);
    SeededRng rng(seed * 7919);
    const auto [si, sj] = random_free(r, rng);
    if (si < 0) continue;
    const int ti = rng.uniform_int(0, n - 1), tj = rng.uniform_int(0, n - 1);
    const auto flood = oracle::reachable_cells(r, si, sj);
    const bool expect = flood[tj * n + ti] != 0;

    const auto b = bug1(r, center(n, si, sj), center(n, ti, tj));
    const auto o = bfs_shortest(r, center(n, si, sj), center(n, ti, tj));
    ASSERT_EQ(b.path.status == PathStatus::Reached, expect) << "seed " << seed;
    ASSERT_EQ(o.status == PathStatus::Reached, expect) << "seed " << seed;
    expect_safe_walk(r, b.path);
    expect_safe_walk(r, o);
    if (expect) {
      ASSERT_LE(o.length, b.path.length + 1e-9) << "seed " << seed;
      ++reached;
    } else {
      ++unreachable;
    }
  }
  EXPECT_GT(reached, 50);
  EXPECT_GT(unreachable, 20);
}

TEST(Bfs, EmptyRasterIsStraightDigitalLine) {
  const int n = 64;
  const CSpaceRaster r(n);
  const auto p = bfs_shortest(r, center(n, 3, 4), center(n, 40, 20));
  ASSERT_EQ(p.status, PathStatus::Reached);
  EXPECT_NEAR(p.length, oracle::l1_between_cells(n, 3, 4, 40, 20), 1e-9);
  // equal L1 cost paths are broken toward the straight line
  const double di = -27, dj = 16;  // wraps in theta1: 3 -> 40 is -27 cells
  for (const auto& w : p.waypoints) {
    double x = oracle::cell_index(n, w.theta1.rad()) - 3.0;
    if (x > 32) x -= n;
    const double y = oracle::cell_index(n, w.theta2.rad()) - 4.0;
    EXPECT_LE(std::abs(x * dj - y * di) / std::hypot(di, dj), 1.0);
  }
}

TEST(Bfs, LengthIsMinimalL1) {
  // Dijkstra oracle with unit orthogonal and double diagonal costs
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 24;
    const auto r = oracle::random_raster(seed + 1000, n, 5);
    SeededRng rng(seed);
    const auto [si, sj] = random_free(r, rng);
    const auto [ti, tj] = random_free(r, rng);
    std::vector<int> dist(n * n, 1 << 30);
    std::vector<char> done(n * n, 0);
    dist[sj * n + si] = 0;
    for (int iter = 0; iter < n * n; ++iter) {
      int best = -1;
      for (int c = 0; c < n * n; ++c) {
        if (!done[c] && !r.occupied(c % n, c / n) && (best < 0 || dist[c] < dist[best])) best = c;
      }
      if (best < 0 || dist[best] >= (1 << 30)) break;
      done[best] = 1;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int i = (best % n + di + n) % n, j = (best / n + dj + n) % n;
          if (r.occupied(i, j)) continue;
          dist[j * n + i] = std::min(dist[j * n + i], dist[best] + std::abs(di) + std::abs(dj));
        }
      }
    }
    const auto p = bfs_shortest(r, center(n, si, sj), center(n, ti, tj));
    if (dist[tj * n + ti] >= (1 << 30)) {
      EXPECT_EQ(p.status, PathStatus::Unreachable);
    } else {
      ASSERT_EQ(p.status, PathStatus::Reached);
      EXPECT_NEAR(p.length, dist[tj * n + ti] * kTwoPi / n, 1e-9) << seed;
    }
  }
}

TEST(Bfs, OccupiedTargetIsUnreachable) {
  CSpaceRaster r(16);
  r.set(9, 9, true);
  const auto p = bfs_shortest(r, center(16, 1, 1), center(16, 9, 9));
  EXPECT_EQ(p.status, PathStatus::Unreachable);
  EXPECT_EQ(bug1(r, center(16, 1, 1), center(16, 9, 9)).path.status, PathStatus::Unreachable);
}

TEST(Bug1, ReplicaSceneReachesTarget) {
  const Scenario s = fig3_replica();
  const auto r = build_raster(s.arm, s.links, s.obstacles, 128);
  const auto b = bug1(r, s.start, s.target);
  const auto o = bfs_shortest(r, s.start, s.target);
  EXPECT_EQ(b.path.status, PathStatus::Reached);
  EXPECT_EQ(o.status, PathStatus::Reached);
  EXPECT_GE(b.trace.hit_points.size(), 1u);
  expect_safe_walk(r, b.path);
  EXPECT_LE(b.path.length, oracle::l1_between_cells(128, cell_of(r, s.start).i, cell_of(r, s.start).j,
                                                    cell_of(r, s.target).i, cell_of(r, s.target).j) +
                               1.5 * oracle::boundary_perimeter(r));
}
