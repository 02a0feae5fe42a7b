#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <numbers>

#include "support/oracles.hpp"
#include "torusarm/gateway/engine.hpp"
#include "torusarm/torusarm.hpp"

using namespace torusarm;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  const std::string cmd = std::string(TORUSARM_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  const int raw = ::pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("torusarm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string put(const Scenario& s, const std::string& name) {
    const fs::path p = dir_ / name;
    save(s, p);
    return p.string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, BuildCspaceOnEmptySceneIsAllFree) {
  Scenario s;
  s.start = {1, 1};
  s.target = {2, 2};
  const auto scene = put(s, "empty.json");
  const auto pgm = (dir_ / "empty.pgm").string();
  const CliResult r = cli("build-cspace -s " + scene + " -n 32 -o " + pgm);
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("occupied cells: 0"), std::string::npos) << r.out;
  const std::string bytes = read_file(pgm);
  ASSERT_GE(bytes.size(), 32u * 32u);
  for (std::size_t k = bytes.size() - 32 * 32; k < bytes.size(); ++k) ASSERT_EQ(static_cast<unsigned char>(bytes[k]), 255);
  const auto meta = from_sidecar(read_file(sidecar_path(pgm)));
  EXPECT_EQ(meta.n, 32);
  EXPECT_EQ(meta.scenario_hash, hash_hex(scenario_hash(s)));
}

TEST_F(CliTest, BuildCspaceOnShoulderDiskIsAllBlocked) {
  // S and T collide too; rasterizing does not need them
  Scenario s;
  s.obstacles = {{Circle{{0, 0}, 0.05}}};
  const fs::path file = dir_ / "disk.json";
  write_file(file, scenario_to_json(s).dump());
  const auto pgm = (dir_ / "disk.pgm").string();
  const CliResult r = cli("build-cspace -s " + file.string() + " -n 16 -o " + pgm);
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("occupied cells: 256"), std::string::npos) << r.out;
  const std::string bytes = read_file(pgm);
  for (std::size_t k = bytes.size() - 256; k < bytes.size(); ++k) ASSERT_EQ(bytes[k], 0);
  EXPECT_EQ(cli("plan -n 16 -s " + file.string()).status, 1);
}

TEST_F(CliTest, BuildCspaceMatchesLibraryRaster) {
  const auto pgm = (dir_ / "fig3.pgm").string();
  const CliResult r = cli("build-cspace --builtin fig3-replica -n 128 --threads 3 -o " + pgm);
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("components: 1\n"), std::string::npos) << r.out;
  const Scenario s = fig3_replica();
  EXPECT_TRUE(from_pgm(read_file(pgm)) == oracle::brute_force_raster(s, 128));
}

TEST_F(CliTest, PlanReportsBothPlanners) {
  Scenario open;
  open.start = {1, 1};
  open.target = {4, 5};
  CliResult r = cli("plan -n 64 -s " + put(open, "open.json"));
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("bug1: reached"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("bfs: reached"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("agree: yes"), std::string::npos);

  // link 1 cannot pass either side disk, so theta1 is trapped in (0, pi)
  Scenario walled;
  walled.obstacles = {{Circle{{0.5, 0}, 0.1}}, {Circle{{-0.5, 0}, 0.1}}};
  walled.start = {std::numbers::pi / 2, 0};
  walled.target = {3 * std::numbers::pi / 2, 0};
  r = cli("plan -n 64 -s " + put(walled, "walled.json"));
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("bug1: unreachable"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("bfs: unreachable"), std::string::npos) << r.out;
}

TEST_F(CliTest, PlanAgreesOnSeededScenes) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const CliResult g = cli("gen-scenario --seed " + std::to_string(seed) + " --link-width 0.02");
    ASSERT_EQ(g.status, 0);
    const Scenario s = scenario_from_text(g.out);
    EXPECT_TRUE(s == [&] {
      RandomScenarioParams p;
      p.links.width = 0.02;
      return random_scenario(seed, p);
    }());
    const fs::path file = dir_ / "s.json";
    write_file(file, g.out);
    const CliResult r = cli("plan -n 64 -s " + file.string());
    EXPECT_EQ(r.status, 0) << "seed " << seed << "\n" << r.out;
    EXPECT_NE(r.out.find("agree: yes"), std::string::npos) << seed;
  }
}

TEST_F(CliTest, PlanWaypointsAreFreeAndAdjacent) {
  const CliResult r = cli("plan --builtin fig3-replica -n 64 --waypoints");
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string line;
  const CSpaceRaster raster = build_raster(fig3_replica().arm, fig3_replica().links, fig3_replica().obstacles, 64);
  std::vector<Cell> cells;
  while (std::getline(in, line)) {
    double a, b;
    if (std::sscanf(line.c_str(), "%lf %lf", &a, &b) == 2) cells.push_back(cell_of(64, {a, b}));
  }
  ASSERT_GT(cells.size(), 2u);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    EXPECT_FALSE(raster.occupied(cells[k]));
    if (k == 0) continue;
    const int di = std::abs(wrap_index(cells[k].i - cells[k - 1].i + 32, 64) - 32);
    const int dj = std::abs(wrap_index(cells[k].j - cells[k - 1].j + 32, 64) - 32);
    EXPECT_LE(std::max(di, dj), 1);
  }
}

TEST_F(CliTest, SummarizeRunLogs) {
  std::vector<std::string> files;
  std::vector<RunMetrics> expected;
  for (int k = 0; k < 3; ++k) {
    Scenario s = fig3_replica();
    auto st = start_run(s);
    Controller c(s, {0.05});
    SeededRng rng(90 + k);
    double t = 0;
    for (int m = 0; m < 40 * (k + 1); ++m) record_step(st, c.pointer_c({rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi)}), t += 0.5);
    end_run(st, t);
    expected.push_back(st.metrics);
    const fs::path f = dir_ / ("run" + std::to_string(k) + ".log");
    write_file(f, format_run_log(st));
    files.push_back(f.string());
  }
  const CliResult r = cli("summarize " + files[0] + " " + files[1] + " " + files[2]);
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out, format_summary(summarize(expected)));
  const CliResult ref = cli("summarize --reference");
  ASSERT_EQ(ref.status, 0);
  EXPECT_NE(ref.out.find("path length,129.04,15.13,393.90,107.99"), std::string::npos) << ref.out;
  EXPECT_NE(ref.out.find("path length,12.37,12.24,12.67,"), std::string::npos) << ref.out;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("plan -s " + (dir_ / "missing.json").string()).status, 2);
  EXPECT_EQ(cli("plan --bogus").status, 1);
  EXPECT_EQ(cli("").status, 1);
  EXPECT_EQ(cli("--help").status, 0);
  write_file(dir_ / "bad.json", "{\"format_version\": 1");
  EXPECT_EQ(cli("plan -s " + (dir_ / "bad.json").string()).status, 1);
  EXPECT_EQ(cli("summarize").status, 1);
  EXPECT_EQ(cli("build-cspace --builtin fig3-replica -n 4 -o " + (dir_ / "x.pgm").string()).status, 1);
  EXPECT_EQ(cli("build-cspace --builtin fig3-replica -o /nonexistent/dir/x.pgm").status, 2);
}

TEST_F(CliTest, ReplayMatchesInProcessReplay) {
  gateway::SessionEngine e;
  e.handle_json({{"type", "load_scenario"}, {"name", "fig3-replica"}}, 0);
  SeededRng rng(91);
  for (int k = 1; k <= 200; ++k) {
    e.handle_json({{"type", "pointer_c"}, {"theta1", rng.uniform(0, kTwoPi)}, {"theta2", rng.uniform(0, kTwoPi)}, {"buttons", 1}}, k * 0.02);
  }
  e.handle_json({{"type", "end_run"}}, 5);
  const fs::path log = dir_ / "session.log", run = dir_ / "run.log";
  write_file(log, e.command_log_text());
  const CliResult r = cli("replay " + log.string() + " --run-log " + run.string());
  ASSERT_EQ(r.status, 0);
  const auto expected = gateway::replay(e.command_log_text());
  EXPECT_EQ(r.out, gateway::format_events(expected.events));
  EXPECT_EQ(read_file(run), e.run_log());
}
