#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("llrgd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(LLRGD_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }
  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }
  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  static json load(const fs::path& p) { return json::parse(slurp(p)); }
  std::string stdout_text() const { return slurp(dir_ / "stdout.txt"); }
  std::string stderr_text() const { return slurp(dir_ / "stderr.txt"); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RunConeEscapesWithOneEvent) {
  ASSERT_EQ(run("run --objective cubic_cone --x0 1.5,0.5 --theta 3 --out " + out("a")), 0) << stderr_text();
  for (const char* f : {"trajectory.json", "trajectory.csv", "events.json", "summary.json"})
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  const json s = load(dir_ / "a" / "summary.json");
  const json& r = s["runs"][0];
  ASSERT_EQ(r["events"].size(), 1u);
  ASSERT_FALSE(r["events"][0]["k_exit"].is_null());
  EXPECT_LE(r["events"][0]["k_exit"].get<int>(), 50);
  EXPECT_EQ(load(dir_ / "a" / "events.json"), r["events"]);
}

TEST_F(Cli, RunBowlConvergesWithinBound) {
  ASSERT_EQ(run("run --objective quadratic_bowl --theta 0.5 --out " + out("a")), 0) << stderr_text();
  const json r = load(dir_ / "a" / "summary.json")["runs"][0];
  EXPECT_EQ(r["status"], "Converged");
  EXPECT_LE(r["final_value"].get<double>(), 0.125);
  EXPECT_DOUBLE_EQ(r["error_bound"].get<double>(), 0.125);
}

TEST_F(Cli, UnknownObjectiveWritesNothing) {
  EXPECT_EQ(run("run --objective no_such_thing --out " + out("a")), 1);
  EXPECT_FALSE(fs::exists(dir_ / "a"));
  EXPECT_NE(stderr_text().find("unknown objective"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run("run --bogus-flag"), 1);
  EXPECT_EQ(run("run --objective cubic_cone --x0 1,2,3 --out " + out("a")), 1);
  EXPECT_EQ(run("run --objective cubic_cone --gamma -1 --out " + out("b")), 1);
  EXPECT_EQ(run("run --objective cubic_cone --x0 one,two --out " + out("c")), 1);
  EXPECT_EQ(run("region --objective cubic_valley --x0 1.5,0 --theta 1 --out " + out("d")), 1);
  EXPECT_EQ(run("mlp-compare --widths 2,0,2 --out " + out("e")), 1);
  EXPECT_EQ(run(""), 1);
  for (const char* d : {"a", "b", "c", "d", "e"}) EXPECT_FALSE(fs::exists(dir_ / d)) << d;
}

TEST_F(Cli, NumericalFailureExitsTwo) {
  EXPECT_EQ(run("run --objective quadratic_bowl --x0 1,1 --gamma 10 --escape-radius 1e308 --out " + out("a")), 2);
  EXPECT_EQ(load(dir_ / "a" / "summary.json")["runs"][0]["status"], "NumericalFailure");
}

TEST_F(Cli, AnalyzeValleyReportsDegenerateOrigin) {
  ASSERT_EQ(run("analyze --objective cubic_valley --box -2,2 --out " + out("a")), 0) << stderr_text();
  const json pts = load(dir_ / "a" / "analysis.json")["critical_points"]["points"];
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0]["classification"], "NonStrictOrDegenerate");
  EXPECT_NEAR(pts[0]["location"][0].get<double>(), 0.0, 1e-6);
}

TEST_F(Cli, AnalyzeRegularizedValleyAcceptsNegativeComponents) {
  ASSERT_EQ(run("analyze --objective cubic_valley --regularizer -1,0 --out " + out("a")), 0) << stderr_text();
  const json pts = load(dir_ / "a" / "analysis.json")["critical_points"]["points"];
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0]["classification"], "StrictSaddle");
  EXPECT_EQ(pts[1]["classification"], "LocalMin");
}

TEST_F(Cli, AnalyzeMilnorFractionIsSmall) {
  ASSERT_EQ(run("analyze --objective cubic_valley --milnor 200 --milnor-min 0.1 --out " + out("a")), 0);
  EXPECT_LE(load(dir_ / "a" / "analysis.json")["milnor"]["fraction_degenerate"].get<double>(), 0.01);
}

TEST_F(Cli, AnalyzeRegionAndPl) {
  ASSERT_EQ(run("analyze --objective quadratic_bowl --x0 0,0 --theta 1 --resolution 60 --pl-check 50 --out " + out("a")), 0)
      << stderr_text();
  const json j = load(dir_ / "a" / "analysis.json");
  EXPECT_TRUE(j["pl_check"]["holds"].get<bool>());
  EXPECT_GT(j["region"]["inside_cells"].get<int>(), 0);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "region.csv"));
  EXPECT_EQ(run("analyze --objective cubic_valley --theta 1 --pl-check 10 --out " + out("b")), 1);
}

TEST_F(Cli, BifurcateDoubleDegenerate) {
  ASSERT_EQ(run("bifurcate --regularizer 0.01 --scales 1,-1,0 --out " + out("a")), 0) << stderr_text();
  const json sw = load(dir_ / "a" / "bifurcation.json")["sweeps"];
  ASSERT_EQ(sw.size(), 3u);
  auto near = [](const json& pts, double c) {
    int n = 0;
    for (const auto& p : pts) n += std::abs(p["location"][0].get<double>() - c) < 0.2;
    return n;
  };
  // l = +0.01: a false minimum and a maximum near -1, nothing near +1.
  EXPECT_EQ(near(sw[0]["critical_points"]["points"], -1.0), 2);
  EXPECT_EQ(near(sw[0]["critical_points"]["points"], 1.0), 0);
  EXPECT_EQ(near(sw[1]["critical_points"]["points"], 1.0), 2);
  EXPECT_EQ(near(sw[1]["critical_points"]["points"], -1.0), 0);
  EXPECT_EQ(sw[2]["critical_points"]["points"].size(), 3u);
}

TEST_F(Cli, MlpCompareWritesCurvesAndSummary) {
  ASSERT_EQ(run("mlp-compare --trials 3 --epochs 200 --theta 0.1 --out " + out("a")), 0) << stderr_text();
  const json s = load(dir_ / "a" / "summary.json");
  EXPECT_TRUE(s["prefix_equal_all"].get<bool>());
  EXPECT_EQ(s["samples"], 100);
  ASSERT_EQ(s["trials"].size(), 3u);
  for (int t = 0; t < 3; ++t) EXPECT_TRUE(fs::exists(dir_ / "a" / ("loss_curve_" + std::to_string(t) + ".csv")));
  const std::string curve = slurp(dir_ / "a" / "loss_curve_0.csv");
  EXPECT_EQ(curve.substr(0, curve.find("\r\n")), "epoch,loss_gd,loss_regularized,grad_norm_gd,grad_norm_regularized,mode");
}

TEST_F(Cli, StableSetHalfOfValley) {
  ASSERT_EQ(run("stable-set --objective cubic_valley --target 0,0 --exclude 0,0.05 --gamma 0.1 --trials 1000 "
                "--max-iters 2000 --box -2,2 --out " + out("a")),
            0)
      << stderr_text();
  EXPECT_NEAR(load(dir_ / "a" / "stable_set.json")["fraction"].get<double>(), 0.5, 0.05);
  EXPECT_EQ(run("stable-set --objective cubic_valley --out " + out("b")), 1);
}

TEST_F(Cli, RegionExports) {
  ASSERT_EQ(run("region --objective cubic_cone --theta 3 --box -4,4 --resolution 50 --out " + out("a")), 0);
  for (const char* f : {"region.csv", "region.json", "gradient_field.csv"}) EXPECT_TRUE(fs::exists(dir_ / "a" / f));
  const json j = load(dir_ / "a" / "region.json");
  EXPECT_TRUE(j["boundary_audit"]["holds"].get<bool>());  // l = grad f at the seed (0,0) is zero
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(dir_ / "c.toml") << "[run]\nobjective = \"cubic_cone\"\nx0 = \"1.5,0.5\"\ntheta = 3\n";
  ASSERT_EQ(run("--config " + out("c.toml") + " run --out " + out("a")), 0) << stderr_text();
  EXPECT_EQ(load(dir_ / "a" / "summary.json")["runs"][0]["events"].size(), 1u);
  ASSERT_EQ(run("--config " + out("c.toml") + " run --theta 0 --out " + out("b")), 0);
  EXPECT_EQ(load(dir_ / "b" / "summary.json")["runs"][0]["events"].size(), 0u);
}

TEST_F(Cli, OutputIsDeterministic) {
  const std::string args = " --objective cubic_valley --trials 4 --box -1,1 --seed 7 --theta 0.5 --max-iters 500";
  ASSERT_EQ(run("run" + args + " --out " + out("a")), 0);
  ASSERT_EQ(run("run" + args + " --out " + out("b")), 0);
  for (const char* f : {"summary.json", "events.json", "trajectory_3.csv"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}
