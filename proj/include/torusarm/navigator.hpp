#pragma once

// Point navigation on the C-space raster.
//
// bug1() is a cell-level Bug1: the C-point walks the digital geodesic toward
// T; on contact it circumnavigates the obstacle with the obstacle on its
// right (it turns left), returns along the boundary to the boundary cell
// closest to T and leaves from there. Motion is 8-connected through free
// cells; obstacles are 4-connected components. Distances are the torus L1
// metric.
//
// The walk is tracked in lifted (unwrapped) cell coordinates, where a
// boundary is either a closed curve or, when the obstacle wraps around the
// torus, an endless curve repeating with a lattice period. The planar give-up
// rule (the step from L runs straight back into the same obstacle) holds
// exactly when the boundary separates the C-point from the T copy it aims for,
// so that is what is tested, by winding number or by crossing parity. When
// the C-point's side holds some other copy of T the walk re-aims at it; when
// it holds none, T is unreachable. A torus component label can not stand in
// for "same obstacle": one wrapped obstacle has many separate lifts.
//
// bfs_shortest() is an independent search over the same move set, used as a
// reachability oracle and for the path-existence indicator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "torusarm/cspace.hpp"
#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"

namespace torusarm {

enum class PathStatus { Reached, Unreachable };

struct PathResult {
  PathStatus status = PathStatus::Unreachable;
  std::vector<Configuration> waypoints;  // cell centers, start cell first
  double length = 0.0;                   // sum of |d theta1| + |d theta2|
};

struct Bug1Trace {
  std::vector<Configuration> hit_points;
  std::vector<Configuration> leave_points;
  std::vector<double> circumnavigation_lengths;
};

struct Bug1Result {
  PathResult path;
  Bug1Trace trace;
};

inline double path_length(std::span<const Configuration> waypoints) {
  double total = 0.0;
  for (std::size_t k = 1; k < waypoints.size(); ++k) total += torus_geodesic(waypoints[k - 1], waypoints[k]).norm_l1();
  return total;
}

namespace nav {

struct Lift {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr Lift operator+(Lift a, Lift b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Lift operator-(Lift a, Lift b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Lift operator*(std::int64_t k, Lift a) { return {k * a.x, k * a.y}; }
  friend constexpr bool operator==(Lift, Lift) = default;
};

inline std::int64_t l1(Lift a, Lift b) { return std::llabs(a.x - b.x) + std::llabs(a.y - b.y); }

// counter-clockwise ring starting east
inline constexpr Lift kRing[8] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

// shortest wrapped offset in (-n/2, n/2]
inline std::int64_t wrapped_offset(std::int64_t from, std::int64_t to, int n) {
  std::int64_t d = (to - from) % n;
  if (d < 0) d += n;
  if (2 * d > n) d -= n;
  return d;
}

inline std::int64_t round_div(std::int64_t num, std::int64_t den) {
  // round half up, den > 0
  std::int64_t twice = 2 * num + den;
  std::int64_t q = twice / (2 * den);
  if (twice % (2 * den) != 0 && twice < 0) --q;
  return q;
}

class Grid {
 public:
  explicit Grid(const CSpaceRaster& raster) : raster_(raster), n_(raster.n()) {}

  int n() const { return n_; }
  Cell cell(Lift p) const { return {wrap_index(static_cast<int>(p.x % n_), n_), wrap_index(static_cast<int>(p.y % n_), n_)}; }
  bool free(Lift p) const { return !raster_.occupied(cell(p)); }
  Configuration center(Lift p) const { return config_of(raster_, cell(p)); }
  bool same_cell(Lift a, Lift b) const { return cell(a) == cell(b); }

 private:
  const CSpaceRaster& raster_;
  int n_;
};

/// One boundary walk. cells[0] is the hit cell; walking cells[0..m-1] and
/// stepping once more lands on cells[0] + period.
struct Contour {
  std::vector<Lift> cells;
  Lift period;

  bool closed() const { return period == Lift{}; }
  std::size_t size() const { return cells.size(); }
  Lift at(std::int64_t k) const {
    // k may run past either end; indices wrap with a period shift
    const auto m = static_cast<std::int64_t>(cells.size());
    std::int64_t q = k / m;
    std::int64_t r = k % m;
    if (r < 0) {
      r += m;
      --q;
    }
    return cells[static_cast<std::size_t>(r)] + q * period;
  }
};

/// Follows the cracks between the 4-connected obstacle and free space with
/// the obstacle on the right, starting at free cell `start` whose orthogonal
/// neighbor start + `wall` is occupied. Each crack has exactly one successor
/// and one predecessor, so the walk returns to its first crack; it stops
/// there. Around a convex corner the walk moves diagonally, which may pass
/// between two diagonally touching obstacle cells, as any 8-connected move may.
inline Contour trace_contour(const Grid& grid, Lift start, Lift wall) {
  const auto turn_left = [](Lift d) { return Lift{-d.y, d.x}; };
  Contour out{{start}, {}};
  const Cell start_cell = grid.cell(start);
  Lift p = start;
  Lift d = wall;
  const std::size_t cap = 16 * static_cast<std::size_t>(grid.n()) * grid.n() + 16;
  for (std::size_t iter = 0;; ++iter) {
    const Lift f = turn_left(d);
    const Lift ahead = p + f;
    const Lift ahead_wall = ahead + d;
    if (!grid.free(ahead_wall)) {
      if (grid.free(ahead)) {
        p = ahead;  // wall runs straight on
      } else {
        d = f;  // concave corner, turn in place
      }
    } else {
      p = ahead_wall;  // convex corner, wrap around it
      d = Lift{-f.x, -f.y};
    }
    if (grid.cell(p) == start_cell && d == wall) {
      out.period = p - start;
      if (out.cells.size() > 1 && out.cells.back() == p) out.cells.pop_back();
      return out;
    }
    if (!(out.cells.back() == p)) out.cells.push_back(p);
    if (iter > cap) throw std::logic_error("trace_contour: boundary walk did not close");
  }
}

/// Winding number of cell center q around a closed contour; q must not be a
/// contour cell (then it can not lie on any contour edge either).
inline int winding_number(const Contour& c, Lift q) {
  int wn = 0;
  const std::size_t m = c.cells.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Lift a = c.cells[k];
    const Lift b = c.cells[(k + 1) % m];
    const std::int64_t side = (b.x - a.x) * (q.y - a.y) - (q.x - a.x) * (b.y - a.y);
    if (a.y <= q.y) {
      if (b.y > q.y && side > 0) ++wn;
    } else if (b.y <= q.y && side < 0) {
      --wn;
    }
  }
  return wn;
}

/// Whether q is one of the lifted cells of the (possibly endless) contour.
inline bool on_contour(const Contour& c, Lift q) {
  for (const Lift p : c.cells) {
    const Lift d = q - p;
    if (c.closed()) {
      if (d == Lift{}) return true;
      continue;
    }
    // d must be an integer multiple of the period
    const Lift per = c.period;
    if (per.x * d.y != per.y * d.x) continue;
    if (per.x != 0 ? d.x % per.x == 0 : d.y % per.y == 0) return true;
  }
  return false;
}

/// Parity of crossings between an endless contour and a ray from q (along
/// +x, or +y for a horizontal period). Cells with equal parity lie on the
/// same side of the contour; q must not be a contour cell.
inline int side_parity(const Contour& c, Lift q) {
  const bool horizontal_ray = c.period.y != 0;
  auto along = [&](Lift p) { return horizontal_ray ? p.y : p.x; };
  auto across = [&](Lift p) { return horizontal_ray ? p.x : p.y; };
  const double level = static_cast<double>(along(q)) + 0.5;
  const auto m = static_cast<std::int64_t>(c.cells.size());

  std::int64_t lo = along(c.cells[0]), hi = lo;
  for (std::int64_t k = 0; k <= m; ++k) {
    const Lift p = c.at(k);
    lo = std::min(lo, along(p));
    hi = std::max(hi, along(p));
  }
  const auto per = static_cast<double>(along(c.period));
  // period copies whose extent along the ray's normal covers `level`
  double k_a = (level - static_cast<double>(hi)) / per;
  double k_b = (level - static_cast<double>(lo)) / per;
  if (k_a > k_b) std::swap(k_a, k_b);
  const auto k_first = static_cast<std::int64_t>(std::floor(k_a)) - 1;
  const auto k_last = static_cast<std::int64_t>(std::ceil(k_b)) + 1;

  int parity = 0;
  for (std::int64_t copy = k_first; copy <= k_last; ++copy) {
    for (std::int64_t k = 0; k < m; ++k) {
      const Lift a = c.at(copy * m + k);
      const Lift b = c.at(copy * m + k + 1);
      const double ya = static_cast<double>(along(a));
      const double yb = static_cast<double>(along(b));
      if ((ya < level) == (yb < level)) continue;
      const double t = (level - ya) / (yb - ya);
      const double x = static_cast<double>(across(a)) + t * static_cast<double>(across(b) - across(a));
      if (x > static_cast<double>(across(q))) parity ^= 1;
    }
  }
  return parity;
}

/// An endless boundary met earlier: admissible target lifts are on the
/// C-point's side of it.
struct SideConstraint {
  Contour contour;
  int obstacle_parity = 0;

  bool admits(Lift q) const { return on_contour(contour, q) || side_parity(contour, q) != obstacle_parity; }
};

class Bug1Walker {
 public:
  Bug1Walker(const CSpaceRaster& raster, const Configuration& start, const Configuration& target)
      : raster_(raster), grid_(raster), n_(raster.n()) {
    const Cell s = cell_of(raster, start);
    if (raster.occupied(s)) throw Error(ErrorCode::StartBlocked, "bug1: start cell is occupied");
    t_ = cell_of(raster, target);
    pos_ = {s.i, s.j};
    goal_ = {pos_.x + wrapped_offset(s.i, t_.i, n_), pos_.y + wrapped_offset(s.j, t_.j, n_)};
    record(pos_);
    step_cap_ = 64 * static_cast<std::size_t>(n_) * n_ + 64;
  }

  Bug1Result run() {
    if (at_target()) return finish(PathStatus::Reached);
    std::optional<Lift> blocked;
    while (true) {
      if (!blocked) {
        blocked = walk_leg();
        if (!blocked) return finish(PathStatus::Reached);
      }
      const Lift obstacle = *blocked;
      blocked.reset();

      const Lift wall = orthogonal_wall(obstacle);
      if (at_target()) return finish(PathStatus::Reached);
      const Contour contour = trace_contour(grid_, pos_, wall);
      result_.trace.hit_points.push_back(grid_.center(pos_));

      // the target may lie on the boundary itself
      for (std::size_t k = 1; k < contour.size(); ++k) {
        if (grid_.same_cell(contour.cells[k], goal_)) {
          std::int64_t walked = 0;
          for (std::size_t w = 1; w <= k; ++w) {
            walked += l1(contour.cells[w - 1], contour.cells[w]);
            move_to(contour.cells[w]);
          }
          result_.trace.circumnavigation_lengths.push_back(cells_to_radians(walked));
          result_.trace.leave_points.push_back(grid_.center(pos_));
          return finish(PathStatus::Reached);
        }
      }

      const auto m = static_cast<std::int64_t>(contour.size());
      for (std::int64_t k = 1; k <= m; ++k) move_to(contour.at(k));
      result_.trace.circumnavigation_lengths.push_back(contour_length(contour));
      // back at the hit cell; for an endless boundary shift the frame by one period
      pos_ = contour.cells[0];
      goal_ = goal_ - contour.period;

      const bool hopeless = !choose_target(contour, obstacle);

      const std::int64_t leave = leave_index(contour);
      walk_to_leave(contour, leave);
      result_.trace.leave_points.push_back(grid_.center(pos_));
      if (hopeless) return finish(PathStatus::Unreachable);

      // the goal is on this side of the boundary now, so a blocked first
      // step can only be a different obstacle
      const Lift next = line_cell(pos_, goal_, 1);
      if (grid_.free(next)) continue;
      blocked = next;
    }
  }

 private:
  double cells_to_radians(std::int64_t steps) const { return static_cast<double>(steps) * raster_.cell_size(); }

  double contour_length(const Contour& c) const {
    const auto m = static_cast<std::int64_t>(c.size());
    std::int64_t total = 0;
    for (std::int64_t k = 0; k < m; ++k) total += l1(c.at(k), c.at(k + 1));
    return cells_to_radians(total);
  }

  bool at_target() const { return grid_.cell(pos_) == t_; }

  // Direction from the C-point to an orthogonal neighbor in the blocking
  // obstacle. A diagonal block with both orthogonal neighbors free is first
  // approached by one orthogonal step.
  Lift orthogonal_wall(Lift obstacle) {
    const Lift d = obstacle - pos_;
    if (d.x == 0 || d.y == 0) return d;
    if (!grid_.free(pos_ + Lift{d.x, 0})) return {d.x, 0};
    if (!grid_.free(pos_ + Lift{0, d.y})) return {0, d.y};
    move_to(pos_ + Lift{d.x, 0});
    return {0, d.y};
  }

  void record(Lift p) { result_.path.waypoints.push_back(grid_.center(p)); }

  void move_to(Lift p) {
    if (p == pos_) return;  // one-cell boundary
    pos_ = p;
    record(p);
    if (result_.path.waypoints.size() > step_cap_) throw std::logic_error("bug1: step budget exhausted");
  }

  Lift line_cell(Lift from, Lift to, std::int64_t k) const {
    const Lift d = to - from;
    const std::int64_t steps = std::max(std::llabs(d.x), std::llabs(d.y));
    if (steps == 0) return from;
    return {from.x + round_div(k * d.x, steps), from.y + round_div(k * d.y, steps)};
  }

  // Walks the digital geodesic toward the goal lift. Returns the blocking
  // cell, or nothing once the target cell is reached.
  std::optional<Lift> walk_leg() {
    const Lift from = pos_;
    const Lift d = goal_ - from;
    const std::int64_t steps = std::max(std::llabs(d.x), std::llabs(d.y));
    for (std::int64_t k = 1; k <= steps; ++k) {
      const Lift c = line_cell(from, goal_, k);
      if (!grid_.free(c)) return c;
      move_to(c);
      if (at_target()) return std::nullopt;
    }
    if (at_target()) return std::nullopt;
    throw std::logic_error("bug1: leg ended away from the target");
  }

  // Picks the target lift for this boundary; false when no lift of T can be
  // on the C-point's side, i.e. T is not reachable.
  bool choose_target(const Contour& contour, Lift obstacle) {
    if (contour.closed()) {
      // C-point outside the boundary: a goal inside it is in or walled in by
      // the obstacle, and so is every other copy of T
      if (winding_number(contour, obstacle) != 0) return winding_number(contour, goal_) == 0;
      // the C-point is enclosed: aim for a copy of T inside the boundary
      if (inside(contour, goal_)) return true;
      std::int64_t min_x = contour.cells[0].x, max_x = min_x, min_y = contour.cells[0].y, max_y = min_y;
      for (const Lift p : contour.cells) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
      }
      std::optional<Lift> best;
      for (std::int64_t x = first_lift(t_.i, min_x); x <= max_x; x += n_) {
        for (std::int64_t y = first_lift(t_.j, min_y); y <= max_y; y += n_) {
          const Lift cand{x, y};
          if (inside(contour, cand) && (!best || l1(cand, pos_) < l1(*best, pos_))) best = cand;
        }
      }
      if (!best) return false;
      goal_ = *best;
      return true;
    }

    SideConstraint constraint{contour, side_parity(contour, obstacle)};
    sides_.push_back(std::move(constraint));
    if (admissible(goal_)) return true;
    std::int64_t reach = 2;
    for (const auto& s : sides_) {
      reach = std::max<std::int64_t>(reach, 2 + std::max(std::llabs(s.contour.period.x), std::llabs(s.contour.period.y)) / n_);
    }
    const Lift base{pos_.x + wrapped_offset(pos_.x, t_.i, n_), pos_.y + wrapped_offset(pos_.y, t_.j, n_)};
    std::optional<Lift> best;
    for (std::int64_t a = -reach; a <= reach; ++a) {
      for (std::int64_t b = -reach; b <= reach; ++b) {
        const Lift cand = base + Lift{a * n_, b * n_};
        if (admissible(cand) && (!best || l1(cand, pos_) < l1(*best, pos_))) best = cand;
      }
    }
    if (!best) return false;
    goal_ = *best;
    return true;
  }

  std::int64_t first_lift(int residue, std::int64_t min_coord) const {
    std::int64_t v = min_coord + ((residue - min_coord) % n_ + n_) % n_;
    return v;
  }

  static bool inside(const Contour& c, Lift q) { return on_contour(c, q) || winding_number(c, q) != 0; }

  bool admissible(Lift q) const {
    return std::all_of(sides_.begin(), sides_.end(), [&](const SideConstraint& s) { return s.admits(q); });
  }

  // distance from a boundary cell (including its period copies) to the goal
  std::pair<std::int64_t, std::int64_t> best_copy(const Contour& c, Lift p) const {
    if (c.closed()) return {l1(p, goal_), 0};
    const Lift per = c.period;
    std::vector<std::int64_t> ks;
    auto add_breakpoints = [&](std::int64_t num, std::int64_t den) {
      if (den == 0) return;
      const double r = static_cast<double>(num) / static_cast<double>(den);
      ks.push_back(static_cast<std::int64_t>(std::floor(r)));
      ks.push_back(static_cast<std::int64_t>(std::ceil(r)));
    };
    add_breakpoints(goal_.x - p.x, per.x);
    add_breakpoints(goal_.y - p.y, per.y);
    std::int64_t best_d = std::numeric_limits<std::int64_t>::max(), best_k = 0;
    for (const std::int64_t k : ks) {
      const std::int64_t d = l1(p + k * per, goal_);
      if (d < best_d || (d == best_d && std::llabs(k) < std::llabs(best_k))) {
        best_d = d;
        best_k = k;
      }
    }
    return {best_d, best_k};
  }

  // Boundary index of the leave cell: closest to the goal, ties to the
  // shorter walk back from the hit cell.
  std::int64_t leave_index(const Contour& c) {
    const auto m = static_cast<std::int64_t>(c.size());
    std::int64_t best = 0, best_d = std::numeric_limits<std::int64_t>::max(), best_k = 0;
    for (std::int64_t k = 0; k < m; ++k) {
      const auto [d, copy] = best_copy(c, c.cells[static_cast<std::size_t>(k)]);
      const std::int64_t walk = std::min(k, m - k);
      if (d < best_d || (d == best_d && walk < std::min(best, m - best))) {
        best = k;
        best_d = d;
        best_k = copy;
      }
    }
    // the period copy closest to the goal is equivalent to shifting the goal
    goal_ = goal_ - best_k * c.period;
    return best;
  }

  // retrace the boundary the shorter way round
  void walk_to_leave(const Contour& c, std::int64_t leave) {
    const auto m = static_cast<std::int64_t>(c.size());
    if (leave <= m - leave) {
      for (std::int64_t k = 1; k <= leave; ++k) move_to(c.at(k));
    } else {
      for (std::int64_t k = -1; k >= leave - m; --k) move_to(c.at(k));
      goal_ = goal_ - c.period;  // arrived at the copy one period back
    }
  }

  Bug1Result finish(PathStatus status) {
    result_.path.status = status;
    result_.path.length = path_length(result_.path.waypoints);
    return std::move(result_);
  }

  const CSpaceRaster& raster_;
  Grid grid_;
  int n_;
  Cell t_;
  Lift pos_;
  Lift goal_;
  std::vector<SideConstraint> sides_;
  std::size_t step_cap_ = 0;
  Bug1Result result_;
};

}  // namespace nav

/// Throws StartBlocked when the start cell is occupied. Always terminates.
inline Bug1Result bug1(const CSpaceRaster& raster, const Configuration& start, const Configuration& target) {
  return nav::Bug1Walker(raster, start, target).run();
}

/// 8-connected toroidal search. The returned path minimizes the L1 length
/// first and the number of moves second; ties between equal paths prefer the
/// cells nearest the straight geodesic.
inline PathResult bfs_shortest(const CSpaceRaster& raster, const Configuration& start, const Configuration& target) {
  using nav::kRing;
  using nav::Lift;
  const int n = raster.n();
  const Cell s = cell_of(raster, start);
  const Cell t = cell_of(raster, target);
  if (raster.occupied(s)) throw Error(ErrorCode::StartBlocked, "bfs_shortest: start cell is occupied");

  PathResult out;
  out.waypoints.push_back(config_of(raster, s));
  if (raster.occupied(t)) return out;

  // cost-to-go from every cell, computed backward from the target
  constexpr auto kInf = std::numeric_limits<std::int64_t>::max();
  const auto idx = [n](int i, int j) { return static_cast<std::size_t>(j) * n + i; };
  std::vector<std::int64_t> cost(static_cast<std::size_t>(n) * n, kInf);
  std::vector<std::int64_t> hops(cost.size(), kInf);
  using Entry = std::tuple<std::int64_t, std::int64_t, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[idx(t.i, t.j)] = 0;
  hops[idx(t.i, t.j)] = 0;
  open.emplace(0, 0, t.i, t.j);
  while (!open.empty()) {
    const auto [c, h, i, j] = open.top();
    open.pop();
    if (c != cost[idx(i, j)] || h != hops[idx(i, j)]) continue;
    for (const Lift d : kRing) {
      const int ni = wrap_index(i + static_cast<int>(d.x), n);
      const int nj = wrap_index(j + static_cast<int>(d.y), n);
      if (raster.occupied(ni, nj)) continue;
      const std::int64_t nc = c + std::llabs(d.x) + std::llabs(d.y);
      const std::int64_t nh = h + 1;
      auto& cc = cost[idx(ni, nj)];
      auto& hh = hops[idx(ni, nj)];
      if (nc < cc || (nc == cc && nh < hh)) {
        cc = nc;
        hh = nh;
        open.emplace(nc, nh, ni, nj);
      }
    }
  }
  if (cost[idx(s.i, s.j)] == kInf) return out;

  const Lift origin{s.i, s.j};
  const Lift goal{s.i + nav::wrapped_offset(s.i, t.i, n), s.j + nav::wrapped_offset(s.j, t.j, n)};
  const Lift dir = goal - origin;
  Lift p = origin;
  while (!(wrap_index(static_cast<int>(p.x % n), n) == t.i && wrap_index(static_cast<int>(p.y % n), n) == t.j)) {
    const int pi = wrap_index(static_cast<int>(p.x % n), n);
    const int pj = wrap_index(static_cast<int>(p.y % n), n);
    std::optional<Lift> pick;
    std::int64_t pick_dev = kInf;
    for (const Lift d : kRing) {
      const int ni = wrap_index(pi + static_cast<int>(d.x), n);
      const int nj = wrap_index(pj + static_cast<int>(d.y), n);
      if (raster.occupied(ni, nj)) continue;
      if (cost[idx(ni, nj)] + std::llabs(d.x) + std::llabs(d.y) != cost[idx(pi, pj)]) continue;
      if (hops[idx(ni, nj)] + 1 != hops[idx(pi, pj)]) continue;
      const Lift q = p + d;
      const Lift rel = q - origin;
      const std::int64_t dev = std::llabs(dir.x * rel.y - dir.y * rel.x);
      if (dev < pick_dev) {
        pick = q;
        pick_dev = dev;
      }
    }
    p = *pick;  // cost strictly decreases along the chosen move
    out.waypoints.push_back(config_of(raster, wrap_index(static_cast<int>(p.x % n), n),
                                      wrap_index(static_cast<int>(p.y % n), n)));
  }
  out.status = PathStatus::Reached;
  out.length = path_length(out.waypoints);
  return out;
}

}  // namespace torusarm
