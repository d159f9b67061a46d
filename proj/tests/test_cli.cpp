#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("capsp_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) {
    const auto out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string(CAPSP_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
  }

  std::string sample(const std::string& name) const { return std::string(CAPSP_SAMPLES_DIR) + "/" + name; }

  fs::path dir_;
};

TEST_F(Cli, GenPath) {
  const auto o = run("gen path 4");
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.out.substr(0, o.out.find('\n')), "4 6");
}

TEST_F(Cli, GenIsByteIdentical) {
  const auto a = run("gen random 32 --weights 1..1024 --seed 7");
  const auto b = run("gen random 32 --weights 1..1024 --seed 7");
  EXPECT_EQ(a.code, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, ApspMatchesOracle) {
  const auto o = run("run --graph " + sample("g3.txt") + " --mode apsp --check-oracle --emit-distances -");
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "0,2,5\n1,0,3\n1,1,0\n");
}

TEST_F(Cli, GeneratedGraphMatchesOracle) {
  const auto o = run("run --graph gen:random:40:1..1600 --seed 3 --check-oracle");
  EXPECT_EQ(o.code, 0) << o.err;
}

TEST_F(Cli, InjectedFaultIsReported) {
  for (const std::string kind : {"inflate", "deflate"}) {
    const auto o = run("run --graph " + sample("g3.txt") + " --inject-fault " + kind + ":0:2");
    EXPECT_EQ(o.code, 1);
    const auto rec = nlohmann::json::parse(o.err.substr(0, o.err.find('\n')));
    EXPECT_EQ(rec["error"], "VerificationFailed");
    bool found = false;
    for (const auto& w : rec["witnesses"]) found = found || (w[0] == 0 && w[1] == 2);
    EXPECT_TRUE(found) << o.err;
  }
}

TEST_F(Cli, KsspSingleSource) {
  const auto o = run("run --graph " + sample("g3.txt") + " --mode kssp --k 1 --sources 0 --emit-distances -");
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "0,2,5\n");
}

TEST_F(Cli, StatsAreStable) {
  const std::string args = "run --graph gen:random:24:1..576 --seed 5 --mode phase-bench --stats-out -";
  const auto a = run(args), b = run(args);
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto doc = nlohmann::json::parse(a.out);
  ASSERT_TRUE(doc.contains("totals"));
  EXPECT_TRUE(doc.contains("phases"));
  EXPECT_TRUE(doc.contains("budget_ratios"));
  std::int64_t sum = 0;
  for (const auto& [name, p] : doc["phases"].items()) sum += p["rounds"].get<std::int64_t>();
  EXPECT_EQ(sum, doc["totals"]["rounds"].get<std::int64_t>());
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("run").code, 2);
  EXPECT_EQ(run("run --graph /nonexistent/graph.txt").code, 2);
  EXPECT_EQ(run("run --graph gen:blob:10:1..2").code, 2);
  EXPECT_EQ(run("run --graph " + sample("g3.txt") + " --mode kssp").code, 2);
  EXPECT_EQ(run("run --graph " + sample("g3.txt") + " --inject-fault melt:0:1").code, 2);
}

TEST_F(Cli, WeightLimitIsConfigurable) {
  const auto file = dir_ / "heavy.txt";
  std::ofstream(file) << "2 2\n0 1 100\n1 0 1\n";
  EXPECT_EQ(run("run --graph " + file.string()).code, 2);
  // Heavier weights need a wider message budget as well.
  EXPECT_EQ(run("run --graph " + file.string() + " --weight-exponent 7").code, 2);
  EXPECT_EQ(run("run --graph " + file.string() + " --weight-exponent 7 --bandwidth-factor 16 --check-oracle").code, 0);
}

}  // namespace
