// torusarm command-line front end. Exit status: 0 success, 1 invalid input
// or validation failure, 2 file or socket I/O failure.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "torusarm/gateway/engine.hpp"
#include "torusarm/gateway/server.hpp"
#include "torusarm/torusarm.hpp"

namespace {

using namespace torusarm;

struct ScenarioSource {
  std::string path;
  std::string builtin;

  void add_to(CLI::App* cmd) {
    auto* p = cmd->add_option("-s,--scenario", path, "scenario file");
    auto* b = cmd->add_option("--builtin", builtin, "built-in scenario name (fig3-replica)");
    p->excludes(b);
  }

  Scenario get(bool check_endpoints = true) const {
    if (!builtin.empty()) {
      if (auto s = gateway::builtin_scenario(builtin)) return *s;
      throw Error(ErrorCode::InvalidArgument, "unknown built-in scenario '" + builtin + "'");
    }
    if (path.empty()) throw Error(ErrorCode::InvalidArgument, "one of --scenario or --builtin is required");
    return load(path, check_endpoints);
  }
};

int exit_code(ErrorCode code) { return code == ErrorCode::Io ? 2 : 1; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torusarm: two-link arm teleoperation engine"};
  app.require_subcommand(1);

  // build-cspace
  ScenarioSource bc_src;
  int bc_n = kDefaultResolution;
  int bc_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int bc_dilate = 0;
  std::string bc_out;
  auto* bc = app.add_subcommand("build-cspace", "rasterize C-space obstacles to a PGM graymap plus .meta sidecar");
  bc_src.add_to(bc);
  bc->add_option("-n,--resolution", bc_n, "cells per axis")->capture_default_str();
  bc->add_option("-o,--output", bc_out, "output .pgm path")->required();
  bc->add_option("--threads", bc_threads, "worker threads")->capture_default_str();
  bc->add_option("--dilate", bc_dilate, "safety dilation in cells")->capture_default_str();

  // plan
  ScenarioSource pl_src;
  int pl_n = kDefaultResolution;
  bool pl_waypoints = false;
  auto* pl = app.add_subcommand("plan", "run bug1 and the BFS oracle from S to T");
  pl_src.add_to(pl);
  pl->add_option("-n,--resolution", pl_n, "cells per axis")->capture_default_str();
  pl->add_flag("--waypoints", pl_waypoints, "also print the bug1 waypoints");

  // gen-scenario
  std::uint64_t gs_seed = 1;
  RandomScenarioParams gs_params;
  std::string gs_out;
  std::string gs_builtin;
  double gs_l1 = 1.0, gs_l2 = 1.0, gs_width = 0.0;
  auto* gs = app.add_subcommand("gen-scenario", "write a seeded random scenario (or a built-in one)");
  gs->add_option("--seed", gs_seed, "generator seed")->capture_default_str();
  gs->add_option("--min-count", gs_params.min_count)->capture_default_str();
  gs->add_option("--max-count", gs_params.max_count)->capture_default_str();
  gs->add_option("--min-size", gs_params.min_size)->capture_default_str();
  gs->add_option("--max-size", gs_params.max_size)->capture_default_str();
  gs->add_option("--circle-fraction", gs_params.circle_fraction)->capture_default_str();
  gs->add_option("--l1", gs_l1, "link 1 length")->capture_default_str();
  gs->add_option("--l2", gs_l2, "link 2 length")->capture_default_str();
  gs->add_option("--link-width", gs_width)->capture_default_str();
  gs->add_option("--builtin", gs_builtin, "write this built-in scenario instead");
  gs->add_option("-o,--output", gs_out, "output path (default: stdout)");

  // summarize
  std::vector<std::string> sm_logs;
  bool sm_reference = false;
  auto* sm = app.add_subcommand("summarize", "descriptive statistics over run logs");
  sm->add_option("logs", sm_logs, "run log files");
  sm->add_flag("--reference", sm_reference, "print the bundled reference tables instead");

  // serve
  gateway::ServerConfig sv;
  double sv_step = kDefaultMaxStep;
  std::string sv_scenarios, sv_logs;
  auto* serve = app.add_subcommand("serve", "host operator sessions over TCP");
  serve->add_option("--bind", sv.bind_address, "bind address")->capture_default_str();
  serve->add_option("--port", sv.port, "TCP port, 0 for ephemeral")->capture_default_str();
  serve->add_option("--step", sv_step, "max step per pointer message (rad)")->capture_default_str();
  serve->add_option("-n,--resolution", sv.engine.default_n, "default raster resolution")->capture_default_str();
  serve->add_option("--max-hz", sv.engine.max_update_hz, "state update rate limit")->capture_default_str();
  serve->add_option("--substeps", sv.engine.substeps, "intermediate collision checks per step")->capture_default_str();
  serve->add_option("--scenario-dir", sv_scenarios, "directory of <name>.json scenarios");
  serve->add_option("--log-dir", sv_logs, "write each session's command log here");

  // replay
  std::string rp_log, rp_run_log;
  double rp_step = kDefaultMaxStep;
  std::string rp_scenarios;
  auto* rp = app.add_subcommand("replay", "feed a recorded command log through a fresh engine");
  rp->add_option("log", rp_log, "command log")->required();
  rp->add_option("--step", rp_step, "max step used when recording")->capture_default_str();
  rp->add_option("--scenario-dir", rp_scenarios, "directory of <name>.json scenarios");
  rp->add_option("--run-log", rp_run_log, "write the resulting run log here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*bc) {
      const Scenario s = bc_src.get(false);  // S and T play no part in the raster
      BuildOptions options;
      options.threads = bc_threads;
      CSpaceRaster raster = build_raster(s.arm, s.links, s.obstacles, bc_n, options);
      if (bc_dilate > 0) raster = dilate(raster, bc_dilate);
      export_raster(raster, s, bc_out);
      const auto labels = label_components(raster);
      std::cout << "resolution: " << bc_n << "\n"
                << "occupied cells: " << raster.occupied_count() << "\n"
                << "components: " << labels.count << "\n"
                << "wrote " << bc_out << " and " << sidecar_path(bc_out) << "\n";
    } else if (*pl) {
      const Scenario s = pl_src.get();
      const CSpaceRaster raster = build_raster(s.arm, s.links, s.obstacles, pl_n);
      const auto from = nearest_free_cell(raster, s.start);
      if (!from) throw Error(ErrorCode::StartBlocked, "start cell and all its neighbors are occupied at this resolution");
      if (*from != cell_of(raster, s.start)) {
        std::cout << "note: start cell occupied at this resolution, planning from cell " << from->i << "," << from->j << "\n";
      }
      const Configuration start = config_of(raster, *from);
      const auto b = bug1(raster, start, s.target);
      const auto o = bfs_shortest(raster, start, s.target);
      auto status = [](PathStatus st) { return st == PathStatus::Reached ? "reached" : "unreachable"; };
      std::cout << "bug1: " << status(b.path.status) << " length " << fmt("%.4f", b.path.length) << " steps "
                << b.path.waypoints.size() - 1 << " hits " << b.trace.hit_points.size() << "\n"
                << "bfs: " << status(o.status) << " length " << fmt("%.4f", o.length) << " steps "
                << o.waypoints.size() - 1 << "\n"
                << "agree: " << (b.path.status == o.status ? "yes" : "no") << "\n";
      if (pl_waypoints) {
        for (const auto& w : b.path.waypoints) std::cout << fmt("%.6f", w.theta1.rad()) << " " << fmt("%.6f", w.theta2.rad()) << "\n";
      }
      return b.path.status == o.status ? 0 : 1;
    } else if (*gs) {
      Scenario s;
      if (!gs_builtin.empty()) {
        auto b = gateway::builtin_scenario(gs_builtin);
        if (!b) throw Error(ErrorCode::InvalidArgument, "unknown built-in scenario '" + gs_builtin + "'");
        s = *b;
      } else {
        gs_params.arm = {gs_l1, gs_l2};
        gs_params.links = {gs_width};
        s = random_scenario(gs_seed, gs_params);
      }
      if (gs_out.empty()) {
        std::cout << to_text(s);
      } else {
        save(s, gs_out);
        std::cout << "wrote " << gs_out << "\n";
      }
    } else if (*sm) {
      std::vector<Statistic> rows;
      if (sm_reference) {
        std::vector<RunMetrics> runs;
        for (std::size_t k = 0; k < reference::kSampleRunPathLengths.size(); ++k) {
          RunMetrics m;
          m.path_length = reference::kSampleRunPathLengths[k];
          m.elapsed = reference::kSampleRunTimes[k];
          runs.push_back(m);
        }
        std::cout << "W-space cohort\n" << format_summary(std::vector{reference::kWspacePathLength, reference::kWspaceTime})
                  << "\nC-space sample runs\n" << format_summary(summarize(runs));
        return 0;
      }
      if (sm_logs.empty()) throw Error(ErrorCode::InvalidArgument, "no run logs given");
      std::vector<RunMetrics> runs;
      for (const auto& path : sm_logs) runs.push_back(metrics_from_log(parse_run_log(read_file(path), path)));
      std::cout << format_summary(summarize(runs));
    } else if (*serve) {
      sv.engine.limit.max_step = sv_step;
      sv.engine.scenario_dir = sv_scenarios;
      sv.log_dir = sv_logs;
      gateway::Server server(sv);
      server.start();
      std::cout << "listening on " << sv.bind_address << ":" << server.port() << std::endl;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    } else if (*rp) {
      gateway::EngineConfig config;
      config.limit.max_step = rp_step;
      config.scenario_dir = rp_scenarios;
      const auto result = gateway::replay(read_file(rp_log), config);
      std::cout << gateway::format_events(result.events);
      if (!rp_run_log.empty()) write_file(rp_run_log, result.run_log);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  }
  return 0;
}
