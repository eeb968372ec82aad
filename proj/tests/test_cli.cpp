#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

// One scratch directory per test so parallel test processes do not collide.
fs::path workdir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto d = fs::temp_directory_path() / "qato_cli_test" / info->name();
  if (!fs::exists(d)) fs::create_directories(d);
  return d;
}

int qato(const std::string& args) {
  const std::string cmd = "cd '" + workdir().string() + "' && '" QATO_CLI_PATH "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { fs::remove_all(workdir()); }
};

TEST_F(Cli, RunWritesBundle) {
  ASSERT_EQ(qato("run --problem benchmark:truss6 --solver exhaustive --seed 1 --out r1"), 0);
  const auto d = workdir() / "r1";
  EXPECT_TRUE(fs::exists(d / "convergence.csv"));
  EXPECT_TRUE(fs::exists(d / "snapshots" / "design_0000.txt"));
  const auto j = nlohmann::json::parse(slurp(d / "summary.json"));
  EXPECT_EQ(j["N_q"], 7);
  EXPECT_EQ(j["converged"], true);
}

TEST_F(Cli, SaRunIsByteIdentical) {
  ASSERT_EQ(qato("run --problem benchmark:truss21 --solver sa --seed 4 --sweeps 300 --out a"), 0);
  ASSERT_EQ(qato("run --problem benchmark:truss21 --solver sa --seed 4 --sweeps 300 --out b"), 0);
  EXPECT_EQ(slurp(workdir() / "a" / "convergence.csv"), slurp(workdir() / "b" / "convergence.csv"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(qato("run --problem benchmark:truss6 --solver magic"), 2);
  EXPECT_EQ(qato("run"), 2);
  EXPECT_EQ(qato("oc --problem benchmark:truss6"), 2);
  EXPECT_EQ(qato("bench --suite ''"), 2);
  EXPECT_EQ(qato("run --problem benchmark:nope"), 2);
  EXPECT_EQ(qato("run --problem benchmark:truss6 --solver remote"), 2);
  std::ofstream(workdir() / "bad.json") << "{ \"kind\": ";
  EXPECT_EQ(qato("export-qubo --problem bad.json --out q.json"), 2);
}

TEST_F(Cli, RemoteFailureExitsThree) {
  EXPECT_EQ(qato("run --problem benchmark:truss6 --solver remote --endpoint http://127.0.0.1:1/solve --timeout 1 "
                 "--out rf"),
            3);
  EXPECT_TRUE(fs::exists(workdir() / "rf" / "summary.json"));
}

TEST_F(Cli, ExportQuboSizes) {
  ASSERT_EQ(qato("export-qubo --problem benchmark:truss6 --out q6.json"), 0);
  ASSERT_EQ(qato("export-qubo --problem benchmark:truss21 --out q21.json --iteration 2"), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(workdir() / "q6.json"))["n"], 7);
  EXPECT_EQ(nlohmann::json::parse(slurp(workdir() / "q21.json"))["n"], 22);
}

TEST_F(Cli, OcBundle) {
  ASSERT_EQ(qato("oc --problem benchmark:truss6 --v-target 0.35 --out oc6"), 0);
  const auto j = nlohmann::json::parse(slurp(workdir() / "oc6" / "summary.json"));
  EXPECT_EQ(j["method"], "oc");
  EXPECT_NEAR(j["final_volume_ratio"].get<double>(), 0.35, 1e-5);
}

TEST_F(Cli, ProblemFileRoundTrip) {
  ASSERT_EQ(qato("write-benchmarks --out problems"), 0);
  EXPECT_TRUE(fs::exists(workdir() / "problems" / "cube_20.json"));
  ASSERT_EQ(qato("run --problem problems/truss6.json --solver exhaustive --out rf6"), 0);
  const auto rows = slurp(workdir() / "rf6" / "convergence.csv");
  EXPECT_NE(rows.find("iter,objective"), std::string::npos);
}
