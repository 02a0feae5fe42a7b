#pragma once

// Occupancy raster of virtual obstacles over [0, 2pi)^2. Cell (i, j) covers
// theta1 in [2pi i/n, 2pi (i+1)/n) and theta2 in [2pi j/n, 2pi (j+1)/n);
// column n-1 adjoins column 0 and row n-1 adjoins row 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "torusarm/collision.hpp"
#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"
#include "torusarm/kinematics.hpp"

namespace torusarm {

inline constexpr int kDefaultResolution = 256;
inline constexpr int kMinResolution = 8;

struct Cell {
  int i = 0;  // theta1 index (column)
  int j = 0;  // theta2 index (row)

  friend constexpr bool operator==(Cell, Cell) = default;
};

inline constexpr int wrap_index(int k, int n) {
  const int r = k % n;
  return r < 0 ? r + n : r;
}

class CSpaceRaster {
 public:
  CSpaceRaster() = default;
  explicit CSpaceRaster(int n) : n_(n), cells_(static_cast<std::size_t>(n) * n, 0) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "raster resolution must be positive");
  }

  int n() const noexcept { return n_; }
  double cell_size() const noexcept { return kTwoPi / n_; }

  bool occupied(int i, int j) const { return cells_[index(i, j)] != 0; }
  bool occupied(Cell c) const { return occupied(c.i, c.j); }
  /// Lookup with toroidal index wrapping.
  bool occupied_wrapped(int i, int j) const { return occupied(wrap_index(i, n_), wrap_index(j, n_)); }

  void set(int i, int j, bool value) { cells_[index(i, j)] = value ? 1 : 0; }

  /// Row-major storage, row = theta2 index.
  std::span<const std::uint8_t> data() const noexcept { return cells_; }

  std::size_t occupied_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }

  friend bool operator==(const CSpaceRaster&, const CSpaceRaster&) = default;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }

  int n_ = 0;
  std::vector<std::uint8_t> cells_;
};

inline Cell cell_of(int n, const Configuration& q) {
  const double scale = n / kTwoPi;
  const int i = std::min(static_cast<int>(std::floor(q.theta1.rad() * scale)), n - 1);
  const int j = std::min(static_cast<int>(std::floor(q.theta2.rad() * scale)), n - 1);
  return {i, j};
}

inline Cell cell_of(const CSpaceRaster& raster, const Configuration& q) { return cell_of(raster.n(), q); }

inline double cell_center_angle(int n, int k) { return kTwoPi * (k + 0.5) / n; }

/// Cell-center configuration.
inline Configuration config_of(int n, int i, int j) {
  return {cell_center_angle(n, wrap_index(i, n)), cell_center_angle(n, wrap_index(j, n))};
}

inline Configuration config_of(const CSpaceRaster& raster, int i, int j) { return config_of(raster.n(), i, j); }
inline Configuration config_of(const CSpaceRaster& raster, Cell c) { return config_of(raster.n(), c.i, c.j); }

inline bool is_free(const CSpaceRaster& raster, const Configuration& q) { return !raster.occupied(cell_of(raster, q)); }

// A free configuration can sit in a cell whose center is not free. Returns
// the containing cell if free, else the free 8-neighbor whose center is
// closest to q, else nothing.
inline std::optional<Cell> nearest_free_cell(const CSpaceRaster& raster, const Configuration& q) {
  const Cell c = cell_of(raster, q);
  if (!raster.occupied(c)) return c;
  std::optional<Cell> best;
  double best_d = INFINITY;
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      const Cell nb{wrap_index(c.i + di, raster.n()), wrap_index(c.j + dj, raster.n())};
      if (raster.occupied(nb)) continue;
      const double d = torus_geodesic(q, config_of(raster, nb)).norm_l2();
      if (d < best_d) {
        best_d = d;
        best = nb;
      }
    }
  }
  return best;
}

struct BuildOptions {
  int threads = 1;
  // called after each finished column with (columns done, n); may run on a worker thread
  std::function<void(int, int)> progress;
};

/// Two-phase sweep: a column whose link-1 contact test fires at its center
/// theta1 is filled entirely, otherwise link 2 is swept through every row.
/// The result equals evaluating config_collides at every cell center.
inline CSpaceRaster build_raster(const ArmGeometry& arm, const LinkModel& links,
                                 std::span<const Obstacle> obstacles, int n,
                                 const BuildOptions& options = {}) {
  if (n < kMinResolution) {
    throw Error(ErrorCode::InvalidArgument, "raster resolution must be >= " + std::to_string(kMinResolution));
  }
  arm.validate();
  links.validate();
  CSpaceRaster raster(n);

  auto sweep_column = [&](int i) {
    const Angle theta1{cell_center_angle(n, i)};
    if (link1_collides(arm, links, obstacles, theta1)) {
      for (int j = 0; j < n; ++j) raster.set(i, j, true);
      return;
    }
    for (int j = 0; j < n; ++j) {
      const Configuration q{theta1, Angle{cell_center_angle(n, j)}};
      if (link2_collides(arm, links, obstacles, q)) raster.set(i, j, true);
    }
  };

  const int workers = std::clamp(options.threads, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      sweep_column(i);
      if (options.progress) options.progress(i + 1, n);
    }
    return raster;
  }
  // columns are disjoint in storage, so workers write without synchronization
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) sweep_column(i);
    });
  }
  pool.clear();
  if (options.progress) options.progress(n, n);
  return raster;
}

/// Toroidal square dilation by `radius` cells (a safety margin around
/// virtual obstacles).
inline CSpaceRaster dilate(const CSpaceRaster& raster, int radius) {
  if (radius <= 0) return raster;
  const int n = raster.n();
  CSpaceRaster out(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!raster.occupied(i, j)) continue;
      for (int dj = -radius; dj <= radius; ++dj) {
        for (int di = -radius; di <= radius; ++di) out.set(wrap_index(i + di, n), wrap_index(j + dj, n), true);
      }
    }
  }
  return out;
}

enum class Connectivity { Four = 4, Eight = 8 };

struct ComponentLabels {
  int n = 0;
  std::vector<int> labels;  // row-major like the raster; 0 = free
  int count = 0;

  int at(int i, int j) const { return labels[static_cast<std::size_t>(j) * n + i]; }
  int at(Cell c) const { return at(c.i, c.j); }
};

/// Flood-fill labeling of occupied cells with toroidal adjacency. Labels are
/// assigned 1..count in row-major order of each component's first cell.
inline ComponentLabels label_components(const CSpaceRaster& raster, Connectivity conn = Connectivity::Four) {
  const int n = raster.n();
  ComponentLabels out{n, std::vector<int>(static_cast<std::size_t>(n) * n, 0), 0};
  static constexpr int kOffsets[8][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const int neighbors = conn == Connectivity::Four ? 4 : 8;
  std::deque<Cell> queue;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!raster.occupied(i, j) || out.at(i, j) != 0) continue;
      const int label = ++out.count;
      out.labels[static_cast<std::size_t>(j) * n + i] = label;
      queue.push_back({i, j});
      while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (int k = 0; k < neighbors; ++k) {
          const int ni = wrap_index(c.i + kOffsets[k][0], n);
          const int nj = wrap_index(c.j + kOffsets[k][1], n);
          auto& slot = out.labels[static_cast<std::size_t>(nj) * n + ni];
          if (slot == 0 && raster.occupied(ni, nj)) {
            slot = label;
            queue.push_back({ni, nj});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace torusarm
