// Runs the hardedge executable and checks exit codes and outputs.

#include <json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hardedge/io.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kWork = fs::temp_directory_path() / "hardedge_cli_test";

int run(const std::string& args) {
  fs::create_directories(kWork);
  const std::string cmd = std::string(HARDEDGE_CLI) + " " + args + " > " + (kWork / "stdout.txt").string() +
                          " 2> " + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out(const std::string& name) { return (kWork / name).string(); }

TEST(CliSample, WritesFileAndIsReproducible) {
  ASSERT_EQ(run("sample --n 50 --seed 3 --format csv --out " + out("a.csv")), 0);
  ASSERT_EQ(run("sample --n 50 --seed 3 --format csv --out " + out("b.csv")), 0);
  EXPECT_TRUE(fs::exists(out("a.csv")));
  EXPECT_EQ(slurp(out("a.csv")), slurp(out("b.csv")));
  std::ifstream in(out("a.csv"));
  const auto cfg = hardedge::read_configuration_csv(in);
  EXPECT_EQ(cfg.u.size(), 50u);
  EXPECT_EQ(cfg.seed, 3u);
  ASSERT_EQ(run("sample --n 20 --replicates 3 --format json --out " + out("c.json")), 0);
  const auto j = nlohmann::json::parse(slurp(out("c.json")));
  EXPECT_EQ(j["configurations"].size(), 3u);
}

TEST(CliSample, RejectsWallOutsideDroplet) {
  EXPECT_EQ(run("sample --b 1 --rho 1.2 --out " + out("x.csv")), 2);
  EXPECT_NE(slurp(kWork / "stderr.txt").find("hard wall must lie inside the droplet"), std::string::npos);
  EXPECT_EQ(run("sample --alpha -2 --out " + out("x.csv")), 2);
  EXPECT_EQ(run("sample --bogus-flag --out " + out("x.csv")), 2);
}

TEST(CliLimit, ConstantPhiTableAndParity) {
  ASSERT_EQ(run("limit --rho 0.5 --grid 0.5,1,inf --levels 0.1L,0.5L --format csv --out " + out("lim.csv")), 0);
  ASSERT_EQ(run("limit --rho 0.5 --grid 0.5,1,inf --levels 0.1L,0.5L --format json --out " + out("lim.json")), 0);
  std::ifstream csv(out("lim.csv"));
  const auto from_csv = hardedge::read_table_csv(csv);
  const auto j = nlohmann::json::parse(slurp(out("lim.json")));
  const auto from_json = hardedge::table_from_json(j["times"]);
  EXPECT_EQ(from_csv.columns, from_json.columns);
  EXPECT_EQ(from_csv.rows, from_json.rows);
  // m1(inf) equals kappa = 0.75 for phi = 1
  for (const auto& row : from_csv.rows) {
    EXPECT_NEAR(row[6], 0.75, 1e-12);
    if (std::isinf(row[0])) {
      EXPECT_NEAR(row[2], 0.75, 1e-12);
    }
  }
  std::ifstream lcsv(out("lim_levels.csv"));
  const auto levels = hardedge::read_table_csv(lcsv);
  EXPECT_EQ(levels.rows, hardedge::table_from_json(j["levels"]).rows);
}

TEST(CliLimit, ErrorPaths) {
  EXPECT_EQ(run("limit --grid '' --out " + out("e.csv")), 2);
  EXPECT_EQ(run("limit --grid 1,-2 --out " + out("e.csv")), 2);
  EXPECT_NE(slurp(kWork / "stderr.txt").find("-2"), std::string::npos);
  EXPECT_EQ(run("limit --grid 1 --levels 1.0L --out " + out("e.csv")), 2);
  EXPECT_EQ(run("limit --grid 'linspace(0,1,3)' --phi 'exp_decay(1)' --out " + out("ok.json")), 0);
}

TEST(CliVerify, SmokeClt) {
  ASSERT_EQ(run("verify --campaign clt --n 20 --replicates 50 --seed 8 --out " + out("v.json")), 0);
  const auto j = nlohmann::json::parse(slurp(out("v.json")));
  EXPECT_EQ(hardedge::validate_report_json(j), "");
  EXPECT_EQ(j["config"]["replicates"], 50);
  EXPECT_EQ(j["config"]["seed"], 8);
  EXPECT_EQ(j["config"]["grid"].size(), 4u);
}

TEST(CliVerify, ForcedFailureExitsOne) {
  EXPECT_EQ(run("verify --campaign clt --n 20 --replicates 50 --z-threshold 0 --out " + out("f.json")), 1);
  EXPECT_NE(slurp(kWork / "stdout.txt").find("FAIL"), std::string::npos);
}

TEST(CliVerify, ConfigurationErrorsExitTwo) {
  EXPECT_EQ(run("verify --campaign nope --out " + out("g.json")), 2);
  EXPECT_EQ(run("verify --campaign clt --replicates 1 --out " + out("g.json")), 2);
  EXPECT_EQ(run("verify --campaign clt --phi 'sin' --out " + out("g.json")), 2);
}

TEST(CliVerify, ReportIndependentOfThreads) {
  const std::string base = "verify --campaign clt --n 30 --replicates 200 --seed 5 --format csv ";
  ASSERT_EQ(run(base + "--threads 1 --out " + out("t1.csv")), 0);
  ASSERT_EQ(run(base + "--threads 3 --out " + out("t3.csv")), 0);
  EXPECT_EQ(slurp(out("t1.csv")), slurp(out("t3.csv")));
}

TEST(CliVerify, TablePhiFile) {
  {
    std::ofstream f(out("phi.csv"));
    f << "x,y\n0,1\n2,0.5\n5,0.25\n";
  }
  EXPECT_EQ(run("verify --campaign clt --n 20 --replicates 50 --phi table:" + out("phi.csv") + " --out " +
                out("tp.json")),
            0);
  const auto j = nlohmann::json::parse(slurp(out("tp.json")));
  EXPECT_EQ(j["config"]["phi"], "table:" + out("phi.csv"));
}

}  // namespace
