#pragma once

// Scenario definition, validation, persistence and random generation.
//
// File format (JSON, format_version 1), documented in docs/scenario-format.md:
//
//   { "format_version": 1, "name": "...", "description": "...",
//     "arm": { "l1": 1.0, "l2": 1.0, "link_width": 0.0 },
//     "obstacles": [ { "type": "polygon", "vertices": [[x, y], ...] },
//                    { "type": "circle", "center": [x, y], "radius": r } ],
//     "start": [theta1, theta2], "target": [theta1, theta2] }

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "torusarm/collision.hpp"
#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"
#include "torusarm/kinematics.hpp"
#include "torusarm/random.hpp"

namespace torusarm {

inline constexpr int kScenarioFormatVersion = 1;

struct Scenario {
  std::string name;
  std::string description;  // free text, optional in the file
  ArmGeometry arm;
  LinkModel links;
  std::vector<Obstacle> obstacles;
  Configuration start;
  Configuration target;

  bool collides(const Configuration& q) const { return config_collides(arm, links, obstacles, q); }
};

inline bool same_obstacle(const Obstacle& a, const Obstacle& b) {
  if (a.shape.index() != b.shape.index()) return false;
  if (const auto* ca = std::get_if<Circle>(&a.shape)) {
    const auto& cb = std::get<Circle>(b.shape);
    return ca->center == cb.center && ca->radius == cb.radius;
  }
  return std::get<Polygon>(a.shape).vertices == std::get<Polygon>(b.shape).vertices;
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || a.description != b.description || !(a.arm == b.arm) || !(a.links == b.links) || a.start != b.start ||
      a.target != b.target || a.obstacles.size() != b.obstacles.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.obstacles.size(); ++k) {
    if (!same_obstacle(a.obstacles[k], b.obstacles[k])) return false;
  }
  return true;
}

/// Throws ValidationError naming the first violated invariant. With
/// `check_endpoints` the start and target must be collision-free.
inline void validate(const Scenario& s, bool check_endpoints = true) {
  s.arm.validate();
  s.links.validate();
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    if (auto defect = obstacle_defect(s.obstacles[k])) {
      throw Error(ErrorCode::ValidationError, "obstacle " + std::to_string(k) + ": " + *defect);
    }
  }
  if (check_endpoints) {
    if (s.collides(s.start)) throw Error(ErrorCode::ValidationError, "start configuration is in collision");
    if (s.collides(s.target)) throw Error(ErrorCode::ValidationError, "target configuration is in collision");
  }
}

namespace detail {

using nlohmann::json;

inline json point_json(Point2 p) { return json::array({p.x, p.y}); }

inline const json& require(const json& j, std::string_view key, std::string_view where) {
  auto it = j.find(std::string(key));
  if (it == j.end()) {
    throw Error(ErrorCode::ValidationError, std::string(where) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

inline double number(const json& j, std::string_view where) {
  if (!j.is_number()) throw Error(ErrorCode::ValidationError, std::string(where) + ": expected a number");
  return j.get<double>();
}

inline Point2 point(const json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::ValidationError, std::string(where) + ": expected [x, y]");
  }
  return {number(j[0], where), number(j[1], where)};
}

inline Configuration configuration(const json& j, std::string_view where) {
  const Point2 p = point(j, where);
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw Error(ErrorCode::ValidationError, std::string(where) + ": angles must be finite");
  }
  return {p.x, p.y};
}

// 1-based line and column of a byte offset, for parse diagnostics
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using detail::json;
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    if (const auto* c = std::get_if<Circle>(&o.shape)) {
      obstacles.push_back({{"type", "circle"}, {"center", detail::point_json(c->center)}, {"radius", c->radius}});
    } else {
      json verts = json::array();
      for (const auto& v : std::get<Polygon>(o.shape).vertices) verts.push_back(detail::point_json(v));
      obstacles.push_back({{"type", "polygon"}, {"vertices", verts}});
    }
  }
  json out{{"format_version", kScenarioFormatVersion},
           {"name", s.name},
           {"arm", {{"l1", s.arm.l1}, {"l2", s.arm.l2}, {"link_width", s.links.width}}},
           {"obstacles", obstacles},
           {"start", json::array({s.start.theta1.rad(), s.start.theta2.rad()})},
           {"target", json::array({s.target.theta1.rad(), s.target.theta2.rad()})}};
  if (!s.description.empty()) out["description"] = s.description;
  return out;
}

/// Structural decode plus full validation.
inline Scenario scenario_from_json(const nlohmann::json& j, bool check_endpoints = true) {
  if (!j.is_object()) throw Error(ErrorCode::ValidationError, "scenario: document must be an object");
  const auto& version = detail::require(j, "format_version", "scenario");
  if (!version.is_number_integer() || version.get<int>() != kScenarioFormatVersion) {
    throw Error(ErrorCode::ValidationError,
                "scenario: unsupported format_version (expected " + std::to_string(kScenarioFormatVersion) + ")");
  }
  Scenario s;
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorCode::ValidationError, "scenario: name must be a string");
    s.name = it->get<std::string>();
  }
  if (auto it = j.find("description"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorCode::ValidationError, "scenario: description must be a string");
    s.description = it->get<std::string>();
  }
  const auto& arm = detail::require(j, "arm", "scenario");
  s.arm.l1 = detail::number(detail::require(arm, "l1", "arm"), "arm.l1");
  s.arm.l2 = detail::number(detail::require(arm, "l2", "arm"), "arm.l2");
  if (auto it = arm.find("link_width"); it != arm.end()) s.links.width = detail::number(*it, "arm.link_width");

  const auto& obstacles = detail::require(j, "obstacles", "scenario");
  if (!obstacles.is_array()) throw Error(ErrorCode::ValidationError, "scenario: obstacles must be an array");
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const auto& o = obstacles[k];
    const std::string where = "obstacles[" + std::to_string(k) + "]";
    const auto& type = detail::require(o, "type", where);
    if (type == "circle") {
      Circle c{detail::point(detail::require(o, "center", where), where + ".center"),
               detail::number(detail::require(o, "radius", where), where + ".radius")};
      s.obstacles.push_back({c});
    } else if (type == "polygon") {
      const auto& verts = detail::require(o, "vertices", where);
      if (!verts.is_array()) throw Error(ErrorCode::ValidationError, where + ".vertices must be an array");
      Polygon p;
      for (const auto& v : verts) p.vertices.push_back(detail::point(v, where + ".vertices"));
      s.obstacles.push_back({std::move(p)});
    } else {
      throw Error(ErrorCode::ValidationError, where + ": unknown obstacle type");
    }
  }
  s.start = detail::configuration(detail::require(j, "start", "scenario"), "start");
  s.target = detail::configuration(detail::require(j, "target", "scenario"), "target");
  validate(s, check_endpoints);
  return s;
}

inline std::string to_text(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

inline Scenario scenario_from_text(std::string_view text, std::string_view source = "<text>", bool check_endpoints = true) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = detail::line_column(text, offset);
    throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line) + ":" +
                                           std::to_string(col) + ": malformed scenario document");
  }
  return scenario_from_json(j, check_endpoints);
}

inline void save(const Scenario& s, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + destination.string());
  out << to_text(s);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + destination.string());
}

// check_endpoints = false accepts scenes whose S or T collide, which is
// enough for rasterizing.
inline Scenario load(const std::filesystem::path& source, bool check_endpoints = true) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + source.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_text(buf.str(), source.string(), check_endpoints);
}

/// FNV-1a over the canonical serialization; identifies the scene a raster
/// was built from.
inline std::uint64_t scenario_hash(const Scenario& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : scenario_to_json(s).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct RandomScenarioParams {
  int min_count = 2;
  int max_count = 5;
  double min_size = 0.1;   // circle radius / polygon circumradius
  double max_size = 0.35;
  double circle_fraction = 0.5;
  ArmGeometry arm{};
  LinkModel links{};
  double margin = 0.25;    // obstacles may extend this far past the reach disk
  int max_attempts = 50;   // obstacle layouts tried
  int endpoint_samples = 200;  // S/T draws per layout
};

/// Deterministic in `seed`. Obstacles lie in the disk of radius reach+margin
/// and never cover the shoulder; S and T are drawn until collision-free.
inline Scenario random_scenario(std::uint64_t seed, const RandomScenarioParams& params) {
  params.arm.validate();
  params.links.validate();
  if (params.min_count < 0 || params.max_count < params.min_count || !(params.min_size > 0.0) ||
      params.max_size < params.min_size || params.circle_fraction < 0.0 || params.circle_fraction > 1.0 ||
      params.max_attempts < 1 || params.endpoint_samples < 1) {
    throw Error(ErrorCode::InvalidArgument, "random_scenario: invalid parameter ranges");
  }
  SeededRng rng(seed);
  const double outer = params.arm.reach() + params.margin;
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Scenario s;
    s.name = "random-" + std::to_string(seed);
    s.arm = params.arm;
    s.links = params.links;
    const int count = rng.uniform_int(params.min_count, params.max_count);
    for (int k = 0; k < count; ++k) {
      const double size = rng.uniform(params.min_size, params.max_size);
      // keep the shoulder clear, otherwise every configuration collides
      const double lo = size + params.links.inflation() + 0.05;
      const double dist = rng.uniform(std::min(lo, outer), std::max(lo, outer - size));
      const double phi = rng.uniform(0.0, kTwoPi);
      const Point2 center{dist * std::cos(phi), dist * std::sin(phi)};
      if (rng.bernoulli(params.circle_fraction)) {
        s.obstacles.push_back({Circle{center, size}});
      } else {
        // star-shaped about the center with sorted vertex angles, hence simple
        const int verts = rng.uniform_int(3, 7);
        std::vector<double> angles(static_cast<std::size_t>(verts));
        for (auto& a : angles) a = rng.uniform(0.0, kTwoPi);
        std::sort(angles.begin(), angles.end());
        Polygon poly;
        for (double a : angles) {
          const double r = size * rng.uniform(0.5, 1.0);
          poly.vertices.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
        }
        if (obstacle_defect({poly})) {
          poly.vertices.clear();
          for (int v = 0; v < verts; ++v) {
            const double a = phi + kTwoPi * v / verts;
            poly.vertices.push_back({center.x + size * std::cos(a), center.y + size * std::sin(a)});
          }
        }
        s.obstacles.push_back({std::move(poly)});
      }
    }
    auto draw_free = [&](Configuration& out) {
      for (int t = 0; t < params.endpoint_samples; ++t) {
        const Configuration q{rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi)};
        if (!s.collides(q)) {
          out = q;
          return true;
        }
      }
      return false;
    };
    if (draw_free(s.start) && draw_free(s.target)) {
      validate(s);
      return s;
    }
  }
  throw Error(ErrorCode::Infeasible, "random_scenario: no free start/target within the retry budget");
}

/// Hand-placed four-obstacle scene: one obstacle beside the shoulder and
/// three within reach of link 2, whose C-space images all merge into a single
/// virtual obstacle. The coordinates are illustrative, not measured.
inline Scenario fig3_replica() {
  Scenario s;
  s.name = "fig3-replica";
  s.description = "Approximate four-obstacle layout; coordinates chosen by hand, not measured.";
  s.arm = {1.0, 1.0};
  s.links = {0.05};
  s.obstacles = {
      {Circle{{-0.537, 0.310}, 0.24}},
      {Polygon{{{-0.532, 1.244}, {-0.054, 1.392}, {-0.143, 1.679}, {-0.621, 1.531}}}},
      {Circle{{-1.280, -0.681}, 0.22}},
      {Polygon{{{0.148, 1.011}, {0.498, 0.961}, {0.398, 1.311}, {0.178, 1.231}}}},
  };
  s.start = {5.236, 1.0};
  s.target = {3.17, 0.6};
  return s;
}

}  // namespace torusarm
