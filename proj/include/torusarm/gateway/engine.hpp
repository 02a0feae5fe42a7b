#pragma once

// One operator session: applies commands in order and returns the events
// they produce. Deterministic in (command, timestamp) sequence; the command
// log it keeps replays to byte-identical events and run log.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "torusarm/control.hpp"
#include "torusarm/cspace.hpp"
#include "torusarm/error.hpp"
#include "torusarm/gateway/protocol.hpp"
#include "torusarm/navigator.hpp"
#include "torusarm/scenario.hpp"
#include "torusarm/session.hpp"

namespace torusarm::gateway {

struct EngineConfig {
  StepLimit limit{};
  int substeps = 0;             // intermediate collision checks per step
  int default_n = kDefaultResolution;
  int max_n = 1024;
  double max_update_hz = 60.0;  // state events per second, per run
  int rows_per_chunk = 16;
  int raster_threads = 1;
  double goal_tolerance = kDefaultGoalTolerance;
  std::filesystem::path scenario_dir;  // empty: built-ins only
};

/// Built-in scenarios addressable by name.
inline std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "fig3-replica") return fig3_replica();
  return std::nullopt;
}

inline json metrics_json(const RunMetrics& m) {
  return {{"path_length", m.path_length},
          {"elapsed", m.elapsed},
          {"steps", m.steps},
          {"rejected", m.rejected},
          {"outcome", std::string(to_string(m.outcome))}};
}

inline std::string hex_row(const CSpaceRaster& r, int j) {
  // bit i of the row is cell (i, j); most significant bit first within a byte
  static constexpr char kHex[] = "0123456789abcdef";
  const int n = r.n();
  std::string out;
  for (int byte = 0; byte < (n + 7) / 8; ++byte) {
    unsigned v = 0;
    for (int b = 0; b < 8; ++b) {
      const int i = byte * 8 + b;
      if (i < n && r.occupied(i, j)) v |= 0x80u >> b;
    }
    out.push_back(kHex[v >> 4]);
    out.push_back(kHex[v & 15]);
  }
  return out;
}

class SessionEngine {
 public:
  explicit SessionEngine(EngineConfig config = {}) : config_(std::move(config)) { config_.limit.validate(); }

  const EngineConfig& config() const { return config_; }
  const SessionState* session() const { return session_ ? &*session_ : nullptr; }
  const std::vector<std::string>& command_log() const { return log_; }

  std::string command_log_text() const {
    std::string out;
    for (const auto& line : log_) out += line + "\n";
    return out;
  }

  /// Run log of the current run, or an empty string before any scenario.
  std::string run_log() const { return session_ ? format_run_log(*session_) : std::string(); }

  /// Raw payload from the wire. Undecodable payloads yield an error event
  /// and are not logged.
  std::vector<json> handle_payload(std::string_view payload, double timestamp) {
    json j;
    try {
      j = json::parse(payload);
    } catch (const json::parse_error&) {
      return {error_event(ErrorCode::ParseError, "payload is not valid JSON")};
    }
    return handle_json(j, timestamp);
  }

  std::vector<json> handle_json(const json& message, double timestamp) {
    record(message, timestamp);
    try {
      return apply(parse_command(message), timestamp);
    } catch (const Error& e) {
      return {error_event(e.code(), e.what())};
    }
  }

  std::vector<json> handle(const Command& command, double timestamp) {
    record(to_json(command), timestamp);
    try {
      return apply(command, timestamp);
    } catch (const Error& e) {
      return {error_event(e.code(), e.what())};
    }
  }

 private:
  void record(const json& message, double timestamp) {
    char ts[40];
    std::snprintf(ts, sizeof ts, "%.17g", timestamp);
    log_.push_back(std::string(ts) + "\t" + message.dump());
  }

  std::vector<json> apply(const Command& command, double t) {
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "timestamp must be finite");
    if (t < last_t_) throw Error(ErrorCode::InvalidArgument, "timestamps must be nondecreasing");
    last_t_ = t;
    return std::visit([&](const auto& c) { return on(c, t); }, command);
  }

  std::vector<json> on(const Hello& c, double) {
    if (c.protocol != kProtocolVersion) {
      throw Error(ErrorCode::InvalidArgument, "unsupported protocol version " + std::to_string(c.protocol));
    }
    return {{{"type", "welcome"}, {"protocol", kProtocolVersion}, {"server", "torusarm"}}};
  }

  std::vector<json> on(const LoadScenario& c, double t) {
    Scenario s;
    if (c.document) {
      s = scenario_from_json(*c.document, false);
    } else if (auto b = builtin_scenario(c.name)) {
      s = *b;
    } else {
      if (config_.scenario_dir.empty()) throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + c.name + "'");
      const std::filesystem::path file = c.name + ".json";
      if (c.name.empty() || file.has_parent_path() || c.name.find("..") != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "invalid scenario name '" + c.name + "'");
      }
      s = load(config_.scenario_dir / file);
    }
    auto fresh = start_run(s, t, ControlMode::cspace_mode(), config_.goal_tolerance);
    controller_ = std::make_unique<Controller>(std::move(s), config_.limit, config_.substeps);
    session_ = std::move(fresh);
    rasters_.clear();
    return begin_run(t);
  }

  std::vector<json> begin_run(double t) {
    last_state_t_.reset();
    std::vector<json> out;
    emit_state(out, t, true, true);
    if (session_->finished()) out.push_back(run_finished());
    return out;
  }

  std::vector<json> on(const SetMode& c, double t) {
    need_session();
    switch_mode(*session_, c.mode, t);
    controller_->set_mode(c.mode);
    std::vector<json> out;
    emit_state(out, t, true, false);
    return out;
  }

  std::vector<json> on(const PointerW& c, double t) {
    need_active();
    if (session_->mode.kind == ControlMode::Kind::CSpace) {
      throw Error(ErrorCode::InvalidArgument, "work-space pointer while in cspace mode");
    }
    if (c.buttons == 0) return {};
    return step(controller_->pointer_w(c.p), t);
  }

  std::vector<json> on(const PointerC& c, double t) {
    need_active();
    if (session_->mode.kind != ControlMode::Kind::CSpace) {
      throw Error(ErrorCode::InvalidArgument, "C-space pointer while in " + to_string(session_->mode) + " mode");
    }
    if (c.buttons == 0) return {};
    return step(controller_->pointer_c(Configuration{c.theta1, c.theta2}), t);
  }

  std::vector<json> on(const RequestRaster& c, double) {
    need_session();
    const int n = c.n == 0 ? config_.default_n : c.n;
    if (n < kMinResolution || n > config_.max_n) {
      throw Error(ErrorCode::InvalidArgument, "raster resolution must be in [" + std::to_string(kMinResolution) +
                                                  ", " + std::to_string(config_.max_n) + "]");
    }
    const CSpaceRaster& r = raster(n);
    std::vector<json> out;
    const int chunk = std::max(1, config_.rows_per_chunk);
    for (int row = 0; row < n; row += chunk) {
      const int end = std::min(n, row + chunk);
      json rows = json::array();
      for (int j = row; j < end; ++j) rows.push_back(hex_row(r, j));
      out.push_back({{"type", "raster_chunk"}, {"n", n}, {"row_begin", row}, {"row_end", end}, {"rows", rows}});
    }
    out.push_back({{"type", "path_existence"}, {"n", n}, {"reachable", path_exists(r)}});
    return out;
  }

  std::vector<json> on(const Reset&, double t) {
    need_session();
    session_ = start_run(session_->scenario, t, ControlMode::cspace_mode(), config_.goal_tolerance);
    controller_->reset(session_->q);
    controller_->set_mode(session_->mode);
    return begin_run(t);
  }

  std::vector<json> on(const EndRun&, double t) {
    need_session();
    if (session_->finished()) throw Error(ErrorCode::RunFinished, "run already finished");
    end_run(*session_, t);
    return {run_finished()};
  }

  std::vector<json> step(const StepOutcome& outcome, double t) {
    record_step(*session_, outcome, t);
    std::vector<json> out;
    emit_state(out, t, outcome.accepted, false);
    if (session_->finished()) out.push_back(run_finished());
    return out;
  }

  void emit_state(std::vector<json>& out, double t, bool accepted, bool force) {
    if (!force && last_state_t_ && config_.max_update_hz > 0.0 && t - *last_state_t_ < 1.0 / config_.max_update_hz) {
      return;
    }
    last_state_t_ = t;
    const auto pose = forward(session_->scenario.arm, session_->q);
    out.push_back({{"type", "state"},
                   {"q", {session_->q.theta1.rad(), session_->q.theta2.rad()}},
                   {"pose", {{"elbow", {pose.elbow.x, pose.elbow.y}}, {"endpoint", {pose.endpoint.x, pose.endpoint.y}}}},
                   {"accepted", accepted},
                   {"mode", to_string(session_->mode)},
                   {"metrics", metrics_json(session_->metrics)}});
  }

  json run_finished() const {
    return {{"type", "run_finished"},
            {"q", {session_->q.theta1.rad(), session_->q.theta2.rad()}},
            {"metrics", metrics_json(session_->metrics)}};
  }

  const CSpaceRaster& raster(int n) {
    auto it = rasters_.find(n);
    if (it == rasters_.end()) {
      const auto& s = session_->scenario;
      BuildOptions options;
      options.threads = config_.raster_threads;
      it = rasters_.emplace(n, build_raster(s.arm, s.links, s.obstacles, n, options)).first;
    }
    return it->second;
  }

  // From the current cell, or from a free neighbor when the configuration is
  // free but its cell center is not.
  bool path_exists(const CSpaceRaster& r) const {
    const Cell c = cell_of(r, session_->q);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const Cell from{wrap_index(c.i + di, r.n()), wrap_index(c.j + dj, r.n())};
        if ((di != 0 || dj != 0) && !r.occupied(c)) continue;
        if (r.occupied(from)) continue;
        if (bfs_shortest(r, config_of(r, from), session_->scenario.target).status == PathStatus::Reached) return true;
      }
    }
    return false;
  }

  void need_session() const {
    if (!session_) throw Error(ErrorCode::NoScenario, "no scenario loaded");
  }

  void need_active() const {
    need_session();
    if (session_->finished()) throw Error(ErrorCode::RunFinished, "run already finished");
  }

  EngineConfig config_;
  std::optional<SessionState> session_;
  std::unique_ptr<Controller> controller_;
  std::map<int, CSpaceRaster> rasters_;
  std::optional<double> last_state_t_;
  double last_t_ = -INFINITY;
  std::vector<std::string> log_;
};

struct LoggedCommand {
  double timestamp = 0.0;
  json message;
};

inline std::vector<LoggedCommand> parse_command_log(std::string_view text) {
  std::vector<LoggedCommand> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::ParseError, "command log line " + std::to_string(lineno) + ": missing tab");
    LoggedCommand c;
    try {
      std::size_t used = 0;
      c.timestamp = std::stod(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing characters");
      c.message = json::parse(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "command log line " + std::to_string(lineno) + ": malformed");
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct ReplayResult {
  std::vector<json> events;
  std::string run_log;
};

/// Feeds a command log through a fresh engine.
inline ReplayResult replay(std::string_view command_log, const EngineConfig& config = {}) {
  SessionEngine engine(config);
  ReplayResult out;
  for (const auto& c : parse_command_log(command_log)) {
    for (auto& e : engine.handle_json(c.message, c.timestamp)) out.events.push_back(std::move(e));
  }
  out.run_log = engine.run_log();
  return out;
}

/// One event per line, as sent on the wire.
inline std::string format_events(const std::vector<json>& events) {
  std::string out;
  for (const auto& e : events) out += e.dump() + "\n";
  return out;
}

}  // namespace torusarm::gateway
