#pragma once

// Wire format: each message is a frame "<decimal byte count>\n<payload>",
// the payload a compact JSON object with a "type" field. docs/protocol.md
// lists every message.

#include <climits>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include <json.hpp>

#include "torusarm/control.hpp"
#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"

namespace torusarm::gateway {

using nlohmann::json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 16u << 20;

inline std::string encode_frame(std::string_view payload) {
  std::string out = std::to_string(payload.size());
  out.push_back('\n');
  out.append(payload);
  return out;
}

inline std::string encode_frame(const json& message) { return encode_frame(std::string_view(message.dump())); }

/// Incremental frame splitter for a byte stream. A bad length line is
/// reported once and skipped, so one garbled frame does not end the stream.
class FrameDecoder {
 public:
  struct Item {
    std::string payload;
    std::optional<std::string> error;
  };

  void feed(std::string_view bytes) { buffer_.append(bytes); }

  std::optional<Item> next() {
    while (true) {
      if (need_ == 0) {
        const auto nl = buffer_.find('\n', scan_);
        if (nl == std::string::npos) {
          scan_ = buffer_.size();
          if (buffer_.size() > 32) {
            buffer_.clear();
            scan_ = 0;
            return Item{{}, "frame header too long"};
          }
          return std::nullopt;
        }
        std::string_view header(buffer_.data(), nl);
        if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
        std::size_t len = 0;
        bool ok = !header.empty() && header.size() <= 12;
        for (const char c : header) {
          if (c < '0' || c > '9') {
            ok = false;
            break;
          }
          len = len * 10 + static_cast<std::size_t>(c - '0');
        }
        buffer_.erase(0, nl + 1);
        scan_ = 0;
        if (!ok || len > kMaxFrameBytes) return Item{{}, "bad frame header '" + std::string(header.substr(0, 32)) + "'"};
        if (len == 0) return Item{{}, "empty frame"};
        need_ = len;
      }
      if (buffer_.size() < need_) return std::nullopt;
      Item item{buffer_.substr(0, need_), std::nullopt};
      buffer_.erase(0, need_);
      need_ = 0;
      return item;
    }
  }

 private:
  std::string buffer_;
  std::size_t scan_ = 0;
  std::size_t need_ = 0;
};

// ---- commands ----

struct Hello {
  int protocol = kProtocolVersion;
};
struct LoadScenario {
  std::string name;         // built-in or file in the scenario directory
  std::optional<json> document;  // inline scenario, wins over name
};
struct SetMode {
  ControlMode mode;
};
struct PointerW {
  Point2 p;
  int buttons = 0;
};
struct PointerC {
  double theta1 = 0.0;
  double theta2 = 0.0;
  int buttons = 0;
};
struct RequestRaster {
  int n = 0;  // 0: server default
};
struct Reset {};
struct EndRun {};

using Command = std::variant<Hello, LoadScenario, SetMode, PointerW, PointerC, RequestRaster, Reset, EndRun>;

namespace detail {

inline const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return *it;
}

inline double real(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be finite");
  return d;
}

inline int integer(const json& j, const char* key, std::optional<int> fallback = std::nullopt) {
  const auto it = j.find(key);
  if (it == j.end()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  }
  if (!it->is_number_integer()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an integer");
  const auto v = it->get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' out of range");
  return static_cast<int>(v);
}

}  // namespace detail

inline Command parse_command(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "message must be a JSON object");
  const json& type = detail::field(j, "type");
  if (!type.is_string()) throw Error(ErrorCode::ParseError, "field 'type' must be a string");
  const auto t = type.get<std::string>();
  if (t == "hello") return Hello{detail::integer(j, "protocol")};
  if (t == "load_scenario") {
    LoadScenario c;
    if (const auto it = j.find("document"); it != j.end()) {
      if (!it->is_object()) throw Error(ErrorCode::ParseError, "field 'document' must be an object");
      c.document = *it;
    } else {
      const json& name = detail::field(j, "name");
      if (!name.is_string()) throw Error(ErrorCode::ParseError, "field 'name' must be a string");
      c.name = name.get<std::string>();
    }
    return c;
  }
  if (t == "set_mode") {
    const json& mode = detail::field(j, "mode");
    if (!mode.is_string()) throw Error(ErrorCode::ParseError, "field 'mode' must be a string");
    const auto m = mode.get<std::string>();
    if (m == "joint") {
      const int joint = detail::integer(j, "joint");
      if (joint != 1 && joint != 2) throw Error(ErrorCode::ParseError, "field 'joint' must be 1 or 2");
      return SetMode{ControlMode::joint_mode(joint)};
    }
    if (m == "tip") return SetMode{ControlMode::tip_mode()};
    if (m == "cspace") return SetMode{ControlMode::cspace_mode()};
    throw Error(ErrorCode::ParseError, "unknown mode '" + m + "'");
  }
  if (t == "pointer_w") return PointerW{{detail::real(j, "x"), detail::real(j, "y")}, detail::integer(j, "buttons", 0)};
  if (t == "pointer_c") return PointerC{detail::real(j, "theta1"), detail::real(j, "theta2"), detail::integer(j, "buttons", 0)};
  if (t == "request_raster") return RequestRaster{detail::integer(j, "n", 0)};
  if (t == "reset") return Reset{};
  if (t == "end_run") return EndRun{};
  throw Error(ErrorCode::ParseError, "unknown command type '" + t + "'");
}

inline json to_json(const Command& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) {
          return {{"type", "hello"}, {"protocol", v.protocol}};
        } else if constexpr (std::is_same_v<T, LoadScenario>) {
          if (v.document) return {{"type", "load_scenario"}, {"document", *v.document}};
          return {{"type", "load_scenario"}, {"name", v.name}};
        } else if constexpr (std::is_same_v<T, SetMode>) {
          if (v.mode.kind == ControlMode::Kind::Joint) return {{"type", "set_mode"}, {"mode", "joint"}, {"joint", v.mode.joint}};
          return {{"type", "set_mode"}, {"mode", v.mode.kind == ControlMode::Kind::Tip ? "tip" : "cspace"}};
        } else if constexpr (std::is_same_v<T, PointerW>) {
          return {{"type", "pointer_w"}, {"x", v.p.x}, {"y", v.p.y}, {"buttons", v.buttons}};
        } else if constexpr (std::is_same_v<T, PointerC>) {
          return {{"type", "pointer_c"}, {"theta1", v.theta1}, {"theta2", v.theta2}, {"buttons", v.buttons}};
        } else if constexpr (std::is_same_v<T, RequestRaster>) {
          return {{"type", "request_raster"}, {"n", v.n}};
        } else if constexpr (std::is_same_v<T, Reset>) {
          return {{"type", "reset"}};
        } else {
          return {{"type", "end_run"}};
        }
      },
      c);
}

inline json error_event(ErrorCode code, std::string_view message) {
  return {{"type", "error"}, {"code", std::string(to_string(code))}, {"message", std::string(message)}};
}

}  // namespace torusarm::gateway
