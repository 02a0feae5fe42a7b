#pragma once

// Run bookkeeping: S-to-T runs with path length (sum of absolute joint angle
// changes over accepted steps), elapsed time from caller-supplied timestamps,
// mode switches, and the text run log.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "torusarm/control.hpp"
#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"
#include "torusarm/scenario.hpp"

namespace torusarm {

enum class RunOutcome { InProgress, TargetReached, Abandoned };

inline std::string_view to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::InProgress: return "in_progress";
    case RunOutcome::TargetReached: return "target_reached";
    case RunOutcome::Abandoned: return "abandoned";
  }
  return "in_progress";
}

inline RunOutcome parse_outcome(std::string_view s) {
  if (s == "in_progress") return RunOutcome::InProgress;
  if (s == "target_reached") return RunOutcome::TargetReached;
  if (s == "abandoned") return RunOutcome::Abandoned;
  throw Error(ErrorCode::ParseError, "unknown run outcome '" + std::string(s) + "'");
}

struct ModeChange {
  ControlMode mode;
  double timestamp = 0.0;
};

struct RunMetrics {
  double path_length = 0.0;  // radians
  double elapsed = 0.0;      // seconds
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::vector<ModeChange> mode_history;
  RunOutcome outcome = RunOutcome::InProgress;
};

struct StepRecord {
  double timestamp = 0.0;
  ControlMode mode;
  Configuration q;  // new configuration, or the refused candidate
  bool accepted = false;
};

// one raster cell at the default resolution
inline constexpr double kDefaultGoalTolerance = kTwoPi / 256;

struct SessionState {
  Scenario scenario;
  Configuration q;
  ControlMode mode;
  RunMetrics metrics;
  std::vector<Configuration> trace;  // accepted configurations, S first
  std::vector<StepRecord> log;
  double t0 = 0.0;
  double goal_tolerance = kDefaultGoalTolerance;

  bool finished() const { return metrics.outcome != RunOutcome::InProgress; }
};

inline bool within_goal(const SessionState& s, const Configuration& q) {
  return torus_geodesic(q, s.scenario.target).norm_linf() <= s.goal_tolerance;
}

/// Throws InvalidScenario if S or T collide.
inline SessionState start_run(Scenario scenario, double t0 = 0.0, ControlMode mode = ControlMode::cspace_mode(),
                              double goal_tolerance = kDefaultGoalTolerance) {
  if (scenario.collides(scenario.start)) throw Error(ErrorCode::InvalidScenario, "start configuration is in collision");
  if (scenario.collides(scenario.target)) throw Error(ErrorCode::InvalidScenario, "target configuration is in collision");
  if (!(goal_tolerance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "goal tolerance must be >= 0");
  SessionState s;
  s.q = scenario.start;
  s.scenario = std::move(scenario);
  s.mode = mode;
  s.t0 = t0;
  s.goal_tolerance = goal_tolerance;
  s.trace.push_back(s.q);
  s.metrics.mode_history.push_back({mode, t0});
  if (within_goal(s, s.q)) s.metrics.outcome = RunOutcome::TargetReached;
  return s;
}

/// No-op once the run is finished.
inline void record_step(SessionState& s, const StepOutcome& outcome, double timestamp) {
  if (s.finished()) return;
  if (timestamp < s.t0 + s.metrics.elapsed) throw Error(ErrorCode::InvalidArgument, "timestamps must be nondecreasing");
  s.metrics.elapsed = timestamp - s.t0;
  ++s.metrics.steps;
  if (!outcome.accepted) {
    ++s.metrics.rejected;
    s.log.push_back({timestamp, s.mode, outcome.rejected_q.value_or(s.q), false});
    return;
  }
  s.metrics.path_length += torus_geodesic(s.q, outcome.q_new).norm_l1();
  s.q = outcome.q_new;
  s.trace.push_back(s.q);
  s.log.push_back({timestamp, s.mode, s.q, true});
  if (within_goal(s, s.q)) s.metrics.outcome = RunOutcome::TargetReached;
}

inline void switch_mode(SessionState& s, const ControlMode& mode, double timestamp) {
  if (s.finished()) throw Error(ErrorCode::RunFinished, "run already finished");
  if (timestamp < s.t0 + s.metrics.elapsed) throw Error(ErrorCode::InvalidArgument, "timestamps must be nondecreasing");
  s.metrics.elapsed = timestamp - s.t0;
  s.mode = mode;
  s.metrics.mode_history.push_back({mode, timestamp});
}

inline void end_run(SessionState& s, double timestamp) {
  if (s.finished()) return;
  s.metrics.elapsed = std::max(s.metrics.elapsed, timestamp - s.t0);
  s.metrics.outcome = RunOutcome::Abandoned;
}

// ---- summary tables ----

struct Statistic {
  std::string variable;
  double mean = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
  double stddev = 0.0;  // population
};

inline Statistic describe(std::string variable, std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "summary needs at least one run");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {std::move(variable), mean, *lo, *hi, std::sqrt(ss / n)};
}

inline std::vector<Statistic> summarize(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "summary needs at least one run");
  std::vector<double> lengths, times;
  for (const auto& r : runs) {
    lengths.push_back(r.path_length);
    times.push_back(r.elapsed);
  }
  return {describe("path length", lengths), describe("time", times)};
}

inline std::string format_summary(std::span<const Statistic> rows) {
  std::string out = "Variable,Mean,Minimum,Maximum,Stand. Dev\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.2f,%.2f,%.2f,%.2f\n", r.mean, r.minimum, r.maximum, r.stddev);
    out += r.variable + buf;
  }
  return out;
}

// Reference data: five C-space sample runs, and the descriptive statistics
// of a W-space-only cohort (per-run values unavailable).
namespace reference {
inline constexpr std::array<double, 5> kSampleRunPathLengths = {12.67, 12.39, 12.24, 12.27, 12.28};
inline constexpr std::array<double, 5> kSampleRunTimes = {56, 54, 53, 53, 54};
inline const Statistic kWspacePathLength{"path length", 129.04, 15.13, 393.90, 107.99};
inline const Statistic kWspaceTime{"time", 504.83, 90.00, 900.00, 365.89};
}  // namespace reference

// ---- run log ----
//
//   # torusarm run log v1
//   # scenario <name>
//   # start <theta1> <theta2>
//   # columns: timestamp mode theta1 theta2 accepted
//   <timestamp> <mode> <theta1> <theta2> <0|1>
//   ...
//   # end outcome=<o> path_length=<rad> elapsed=<s> steps=<k> rejected=<k>

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_run_log(const SessionState& s) {
  std::string out = "# torusarm run log v1\n# scenario " + s.scenario.name + "\n# start " +
                    format_g17(s.scenario.start.theta1.rad()) + " " + format_g17(s.scenario.start.theta2.rad()) +
                    "\n# columns: timestamp mode theta1 theta2 accepted\n";
  char ts[48];
  for (const auto& r : s.log) {
    std::snprintf(ts, sizeof ts, "%.6f", r.timestamp);
    out += std::string(ts) + " " + to_string(r.mode) + " " + format_g17(r.q.theta1.rad()) + " " +
           format_g17(r.q.theta2.rad()) + (r.accepted ? " 1\n" : " 0\n");
  }
  out += "# end outcome=" + std::string(to_string(s.metrics.outcome)) +
         " path_length=" + format_g17(s.metrics.path_length) + " elapsed=" + format_g17(s.metrics.elapsed) +
         " steps=" + std::to_string(s.metrics.steps) + " rejected=" + std::to_string(s.metrics.rejected) + "\n";
  return out;
}

struct RunLog {
  std::string scenario;
  Configuration start;
  std::vector<StepRecord> records;
  RunMetrics footer;
  bool has_footer = false;
};

inline RunLog parse_run_log(std::string_view text, std::string_view source = "<log>") {
  RunLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(lineno) + ": " + what);
  };
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == "# torusarm run log v1") {
        header = true;
      } else if (line.rfind("# scenario ", 0) == 0) {
        log.scenario = line.substr(11);
      } else if (line.rfind("# start ", 0) == 0) {
        std::istringstream f(line.substr(8));
        double a = 0, b = 0;
        if (!(f >> a >> b)) throw fail("bad start line");
        log.start = {a, b};
      } else if (line.rfind("# end ", 0) == 0) {
        std::istringstream f(line.substr(6));
        std::string kv;
        while (f >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw fail("bad footer field '" + kv + "'");
          const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
          try {
            if (key == "outcome") log.footer.outcome = parse_outcome(val);
            else if (key == "path_length") log.footer.path_length = std::stod(val);
            else if (key == "elapsed") log.footer.elapsed = std::stod(val);
            else if (key == "steps") log.footer.steps = std::stoull(val);
            else if (key == "rejected") log.footer.rejected = std::stoull(val);
          } catch (const std::logic_error&) {
            throw fail("bad footer value '" + kv + "'");
          }
        }
        log.has_footer = true;
      }
      continue;
    }
    if (!header) throw fail("missing run log header");
    std::istringstream f(line);
    StepRecord r;
    std::string mode;
    double a = 0, b = 0;
    int acc = -1;
    if (!(f >> r.timestamp >> mode >> a >> b >> acc) || (acc != 0 && acc != 1)) throw fail("malformed record");
    try {
      r.mode = parse_mode(mode);
      r.q = {a, b};
    } catch (const Error& e) {
      throw fail(e.what());
    }
    r.accepted = acc == 1;
    log.records.push_back(r);
  }
  if (!header) throw fail("missing run log header");
  return log;
}

/// Metrics recomputed from the records; outcome comes from the footer.
inline RunMetrics metrics_from_log(const RunLog& log, double t0 = 0.0) {
  RunMetrics m;
  Configuration q = log.start;
  for (const auto& r : log.records) {
    ++m.steps;
    m.elapsed = r.timestamp - t0;
    if (!r.accepted) {
      ++m.rejected;
      continue;
    }
    m.path_length += torus_geodesic(q, r.q).norm_l1();
    q = r.q;
  }
  if (log.has_footer) {
    m.outcome = log.footer.outcome;
    m.elapsed = log.footer.elapsed;
  }
  return m;
}

}  // namespace torusarm
