#pragma once

// Graymap export of the C-space raster: binary PGM, 0 = obstacle, 255 = free,
// pixel (x, y) = cell (i, j), so row 0 is theta2 = 0. A key=value sidecar
// carries the resolution, the arm and the scenario hash.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "torusarm/cspace.hpp"
#include "torusarm/error.hpp"
#include "torusarm/scenario.hpp"

namespace torusarm {

inline std::string to_pgm(const CSpaceRaster& raster) {
  const int n = raster.n();
  std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(n) * n);
  for (const std::uint8_t v : raster.data()) out.push_back(static_cast<char>(v ? 0 : 255));
  return out;
}

namespace detail {

inline void skip_pgm_space(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      return;
    }
  }
}

inline int pgm_int(const std::string& s, std::size_t& pos) {
  skip_pgm_space(s, pos);
  const std::size_t begin = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (begin == pos || pos - begin > 9) throw Error(ErrorCode::ParseError, "pgm: bad header field");
  return std::stoi(s.substr(begin, pos - begin));
}

}  // namespace detail

/// Reads a square P5 graymap; pixels below 128 count as occupied.
inline CSpaceRaster from_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes.compare(0, 2, "P5") != 0) throw Error(ErrorCode::ParseError, "pgm: missing P5 magic");
  std::size_t pos = 2;
  const int w = detail::pgm_int(bytes, pos);
  const int h = detail::pgm_int(bytes, pos);
  const int maxval = detail::pgm_int(bytes, pos);
  if (w != h || w < 1) throw Error(ErrorCode::ParseError, "pgm: raster must be square");
  if (maxval != 255) throw Error(ErrorCode::ParseError, "pgm: expected maxval 255");
  ++pos;  // single whitespace before the pixels
  if (bytes.size() - pos != static_cast<std::size_t>(w) * h) throw Error(ErrorCode::ParseError, "pgm: truncated pixel data");
  CSpaceRaster raster(w);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const auto v = static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(j) * w + i]);
      raster.set(i, j, v < 128);
    }
  }
  return raster;
}

struct RasterMetadata {
  int n = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  std::string scenario_hash;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_sidecar(const RasterMetadata& m) {
  return "n=" + std::to_string(m.n) + "\nl1=" + format_double(m.l1) + "\nl2=" + format_double(m.l2) +
         "\nscenario_hash=" + m.scenario_hash + "\n";
}

inline RasterMetadata from_sidecar(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "sidecar: expected key=value, got '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::ParseError, std::string("sidecar: missing ") + key);
    return it->second;
  };
  try {
    return {std::stoi(need("n")), std::stod(need("l1")), std::stod(need("l2")), need("scenario_hash")};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "sidecar: malformed number");
  }
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string sidecar_path(const std::filesystem::path& pgm) {
  return pgm.string() + ".meta";
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Writes `path` and `path`.meta.
inline void export_raster(const CSpaceRaster& raster, const Scenario& scenario, const std::filesystem::path& path) {
  write_file(path, to_pgm(raster));
  write_file(sidecar_path(path), to_sidecar({raster.n(), scenario.arm.l1, scenario.arm.l2, hash_hex(scenario_hash(scenario))}));
}

}  // namespace torusarm
