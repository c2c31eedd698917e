#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace oscillib;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oscillib_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "oscillib");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  static Json load(const fs::path& p) { return Json::parse(slurp(p)); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, GenConeHasUnitPeakAtCentre) {
  ASSERT_EQ(call({"gen", "--generator", "cone", "--ndim", "2", "--extent", "64", "--out", dir_.string()}), 0);
  const auto u = read_grid(dir_ / "u.mpgf");
  EXPECT_EQ(u.geometry().shape(), (std::vector<std::size_t>{64, 64}));
  const auto top = std::max_element(u.values().begin(), u.values().end());
  EXPECT_NEAR(*top, 1.0, 1e-12);
  EXPECT_EQ(u.geometry().unravel(static_cast<std::size_t>(top - u.values().begin())), (Index{32, 32, 0, 0}));
}

TEST_F(Cli, GenBumpIsBoundedWithCompactSupport) {
  ASSERT_EQ(call({"gen", "--generator", "bump", "--extent", "48", "--radius", "0.2", "--out", dir_.string(),
                  "--gradient-measure"}),
            0);
  const auto u = read_grid(dir_ / "u.mpgf");
  const auto& g = u.geometry();
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    EXPECT_GE(u[lin], 0.0);
    EXPECT_LE(u[lin], 1.0);
    const auto i = g.unravel(lin);
    const double dx = g.cell_center(i, 0) - g.cell_center({24, 24}, 0);
    const double dy = g.cell_center(i, 1) - g.cell_center({24, 24}, 1);
    if (dx * dx + dy * dy >= 0.04) {
      EXPECT_EQ(u[lin], 0.0);
    }
  }
  EXPECT_TRUE(fs::exists(dir_ / "u_grad.mpgm"));
}

TEST_F(Cli, GenIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(call({"gen", "--generator", "random", "--seed", "5", "--extent", "20", "--out", path("a")}), 0);
  ASSERT_EQ(call({"gen", "--generator", "random", "--seed", "5", "--extent", "20", "--out", path("b")}), 0);
  ASSERT_EQ(call({"gen", "--generator", "random", "--seed", "6", "--extent", "20", "--out", path("c")}), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "u.mpgf"), slurp(dir_ / "b" / "u.mpgf"));
  EXPECT_NE(slurp(dir_ / "a" / "u.mpgf"), slurp(dir_ / "c" / "u.mpgf"));
}

TEST_F(Cli, MaximalDominatesAndMatchesOracle) {
  ASSERT_EQ(call({"gen", "--generator", "random", "--extent", "12", "--out", dir_.string()}), 0);
  ASSERT_EQ(call({"maximal", "--input", path("u.mpgf"), "--out", dir_.string(), "--threads", "3"}), 0);
  ASSERT_EQ(call({"maximal", "--input", path("u.mpgf"), "--out", dir_.string(), "--oracle", "--name", "slow"}), 0);
  const auto u = read_grid(dir_ / "u.mpgf");
  const auto fast = read_grid(dir_ / "Mu.mpgf");
  const auto slow = read_grid(dir_ / "slow.mpgf");
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_GE(fast[i], std::fabs(u[i]));
    EXPECT_EQ(fast[i], slow[i]);
  }
  EXPECT_NE(err_.str().find("noncentred"), std::string::npos);
}

TEST_F(Cli, MaximalErrors) {
  ASSERT_EQ(call({"gen", "--generator", "cone", "--extent", "8", "--out", dir_.string()}), 0);
  EXPECT_EQ(call({"maximal", "--input", path("u.mpgf"), "--variant", "domain", "--out", dir_.string()}), 2);
  EXPECT_EQ(call({"maximal", "--input", path("missing.mpgf"), "--out", dir_.string()}), 3);
  EXPECT_EQ(call({"maximal", "--out", dir_.string()}), 2);
  EXPECT_EQ(call({"maximal", "--input", path("u.mpgf"), "--variant", "sideways"}), 2);
  EXPECT_EQ(call({"maximal", "--input", path("u.mpgf"), "--beta", "abc"}), 2);
  EXPECT_EQ(call({"frobnicate"}), 2);
}

TEST_F(Cli, VerifyConstantIsClean) {
  EXPECT_EQ(call({"verify", "--generator", "constant", "--extent", "16", "--out", dir_.string()}), 0);
  const auto j = load(dir_ / "report.json");
  EXPECT_EQ(j["schema"], "oscillib.report/1");
  EXPECT_EQ(j["scenario"], "theorem");
  EXPECT_EQ(j["summary"]["max_ratio"], 0.0);
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_FALSE(j["config"].contains("threads"));
  EXPECT_FALSE(j["config"].contains("out"));
  const auto csv = slurp(dir_ / "report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "anchor,side,lhs,rhs,ratio,flag");
}

TEST_F(Cli, VerifyConeWithGradientMeasure) {
  EXPECT_EQ(call({"verify", "--generator", "cone", "--extent", "32", "--measure", "gradient", "--alpha", "1",
                  "--out", dir_.string()}),
            0);
  const auto j = load(dir_ / "report.json");
  EXPECT_GT(j["summary"]["max_ratio"].get<double>(), 0.0);
  EXPECT_EQ(j["summary"]["infinite"], 0);
  EXPECT_NE(out_.str().find("theorem: max_ratio="), std::string::npos);
}

TEST_F(Cli, VerifyReadsFilesAndReportsErrors) {
  ASSERT_EQ(call({"gen", "--generator", "cone", "--extent", "16", "--out", dir_.string(), "--gradient-measure"}), 0);
  EXPECT_EQ(call({"verify", "--input", path("u.mpgf"), "--measure", path("u_grad.mpgm"), "--alpha", "1",
                  "--out", dir_.string()}),
            0);
  ASSERT_EQ(call({"gen", "--generator", "cone", "--extent", "12", "--out", path("small"), "--gradient-measure"}), 0);
  EXPECT_EQ(call({"verify", "--input", path("u.mpgf"), "--measure", path("small/u_grad.mpgm"), "--alpha", "1",
                  "--out", dir_.string()}),
            2);
  EXPECT_EQ(call({"verify", "--input", path("nothing.mpgf"), "--out", dir_.string()}), 3);
  EXPECT_EQ(call({"verify", "--scenario", "nonsense", "--out", dir_.string()}), 2);
  // A point mass away from an oscillating input fails the hypothesis.
  write_measure(dir_ / "dirac.mpgm", DiscreteMeasure::dirac(GridGeometry({16, 16}, 1.0 / 16), {0, 0}));
  EXPECT_EQ(call({"verify", "--generator", "random", "--extent", "16", "--measure", path("dirac.mpgm"), "--alpha",
                  "1", "--out", dir_.string()}),
            1);
  EXPECT_FALSE(load(dir_ / "report.json")["valid"].get<bool>());
}

TEST_F(Cli, VerifyOtherScenarios) {
  EXPECT_EQ(call({"verify", "--scenario", "gradient", "--generator", "bump", "--extent", "24", "--out",
                  dir_.string()}),
            0);
  EXPECT_EQ(load(dir_ / "report.json")["summary"]["impossible"], 0);
  EXPECT_EQ(call({"verify", "--scenario", "gradient", "--domain", "corridor", "--variant", "domain", "--out",
                  dir_.string()}),
            0);
  EXPECT_EQ(load(dir_ / "report.json")["scenario"], "gradient-domain");
  EXPECT_EQ(call({"verify", "--scenario", "bmo", "--generator", "logcusp", "--extent", "32", "--family", "dyadic",
                  "--out", dir_.string()}),
            0);
  EXPECT_EQ(call({"verify", "--scenario", "holder", "--generator", "cusp", "--alpha", "0.5", "--extent", "32",
                  "--out", dir_.string()}),
            0);
  EXPECT_EQ(call({"verify", "--scenario", "fpw", "--generator", "cone", "--measure", "gradient", "--alpha", "1",
                  "--extent", "32", "--out", dir_.string()}),
            0);
  EXPECT_EQ(load(dir_ / "report.json")["metrics"]["exponent"], 2.0);
  EXPECT_EQ(call({"verify", "--scenario", "bmo", "--generator", "constant", "--out", dir_.string()}), 2);
}

TEST_F(Cli, WhitneyOutputs) {
  ASSERT_EQ(call({"whitney", "--depth", "2", "--ndim", "2", "--out", dir_.string()}), 0);
  auto j = load(dir_ / "whitney.json");
  EXPECT_EQ(j["schema"], "oscillib.whitney/1");
  EXPECT_EQ(j["summary"]["cubes"], 13);
  EXPECT_EQ(j["generation_sizes"], Json::parse("[1, 12]"));
  EXPECT_TRUE(j["summary"]["endpoints_ok"].get<bool>());

  ASSERT_EQ(call({"whitney", "--depth", "1", "--L", "1", "--r0", "1/3", "--source", "all", "--out", dir_.string()}),
            0);
  j = load(dir_ / "whitney.json");
  EXPECT_EQ(j["generations"][0][0]["side"], Json::parse("[1, 3]"));
  EXPECT_TRUE(j["annulus"]["cubes"].empty());
  EXPECT_EQ(j["chains"].size(), 1u);

  EXPECT_EQ(call({"whitney", "--depth", "0", "--out", dir_.string()}), 2);
  EXPECT_EQ(call({"whitney", "--depth", "31", "--out", dir_.string()}), 2);
  EXPECT_EQ(call({"whitney", "--depth", "2", "--source", "9:0", "--out", dir_.string()}), 2);
  EXPECT_EQ(call({"whitney", "--depth", "2", "--L", "0", "--out", dir_.string()}), 2);
}

TEST_F(Cli, ConfigFileLayersUnderFlags) {
  {
    std::ofstream cfg(dir_ / "gen.json");
    cfg << R"({"generator": "constant", "extent": 6, "value": 3.0, "name": "c"})";
  }
  ASSERT_EQ(call({"gen", "--config", path("gen.json"), "--out", dir_.string()}), 0);
  auto u = read_grid(dir_ / "c.mpgf");
  EXPECT_EQ(u.size(), 36u);
  EXPECT_EQ(u[0], 3.0);
  ASSERT_EQ(call({"gen", "--config", path("gen.json"), "--value", "5", "--out", dir_.string()}), 0);
  u = read_grid(dir_ / "c.mpgf");
  EXPECT_EQ(u[0], 5.0);

  {
    std::ofstream cfg(dir_ / "bad.json");
    cfg << R"({"generator": "constant", "colour": "blue"})";
  }
  EXPECT_EQ(call({"gen", "--config", path("bad.json"), "--out", dir_.string()}), 2);
  {
    std::ofstream cfg(dir_ / "typed.json");
    cfg << R"({"extent": "six"})";
  }
  EXPECT_EQ(call({"gen", "--config", path("typed.json"), "--out", dir_.string()}), 2);
  EXPECT_EQ(call({"gen", "--config", path("absent.json"), "--out", dir_.string()}), 3);
}

TEST_F(Cli, HelpExitsCleanly) {
  EXPECT_EQ(call({"--help"}), 0);
  EXPECT_NE(out_.str().find("verify"), std::string::npos);
  EXPECT_EQ(call({}), 2);
}
