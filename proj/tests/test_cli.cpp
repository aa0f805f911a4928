#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef OPLEN_BINARY
#error "OPLEN_BINARY must point at the oplen executable"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run oplen(const std::string& args) {
  const std::string cmd = std::string(OPLEN_BINARY) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("oplength_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenIsDeterministic) {
  ASSERT_EQ(oplen("gen --n 2 --k 3 --seed 7 --out " + path("a.json")).code, 0);
  ASSERT_EQ(oplen("gen --n 2 --k 3 --seed 7 --out " + path("b.json")).code, 0);
  ASSERT_EQ(oplen("gen --n 2 --k 3 --seed 8 --out " + path("c.json")).code, 0);
  EXPECT_EQ(read("a.json"), read("b.json"));
  EXPECT_NE(read("a.json"), read("c.json"));
  const auto j = json::parse(read("a.json"));
  EXPECT_EQ(j["n"], 2);
  EXPECT_EQ(j["k"], 3);
}

TEST_F(Cli, FactorThenVerify) {
  ASSERT_EQ(oplen("gen --n 2 --k 2 --seed 1 --out " + path("x.json")).code, 0);
  for (const char* c : {"length1", "lemma5", "sub18", "sub19", "t13"}) {
    const auto r = oplen("factor --instance " + path("x.json") + " --construction " + c + " --out " + path("c.json") +
                         " --target-out " + path("t.json"));
    EXPECT_EQ(r.code, 0) << c;
    const auto report = json::parse(r.out);
    EXPECT_TRUE(report["pass"].get<bool>()) << c;
    EXPECT_EQ(report["construction"], c);
    EXPECT_EQ(oplen("verify --instance " + path("t.json") + " --cert " + path("c.json")).code, 0) << c;
  }
}

TEST_F(Cli, FactorPadsToRequestedDepth) {
  ASSERT_EQ(oplen("gen --n 2 --k 2 --seed 1 --out " + path("x.json")).code, 0);
  const auto r = oplen("factor --instance " + path("x.json") + " --d 4");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["depth"], 4);
  EXPECT_EQ(oplen("factor --instance " + path("x.json") + " --construction sub19 --d 2").code, 2);
}

TEST_F(Cli, TamperedClaimStillVerifies) {
  ASSERT_EQ(oplen("gen --n 2 --k 2 --seed 2 --out " + path("x.json")).code, 0);
  ASSERT_EQ(oplen("factor --instance " + path("x.json") + " --out " + path("c.json")).code, 0);
  auto cert = json::parse(read("c.json"));
  cert["claimed_cost"] = 1e-9;
  write("c.json", cert.dump());
  const auto r = oplen("verify --instance " + path("x.json") + " --cert " + path("c.json"));
  EXPECT_EQ(r.code, 0);
  const auto report = json::parse(r.out);
  EXPECT_GT(report["cost"].get<double>(), 1e-3);
}

TEST_F(Cli, TamperedDiagonalFails) {
  ASSERT_EQ(oplen("gen --n 2 --k 2 --seed 3 --out " + path("x.json")).code, 0);
  ASSERT_EQ(oplen("factor --instance " + path("x.json") + " --out " + path("c.json")).code, 0);
  auto cert = json::parse(read("c.json"));
  cert["diags"][0][0][0][0][0] = cert["diags"][0][0][0][0][0].get<double>() + 0.5;
  write("c.json", cert.dump());
  EXPECT_EQ(oplen("verify --instance " + path("x.json") + " --cert " + path("c.json")).code, 1);
}

TEST_F(Cli, InputErrorsExitTwo) {
  ASSERT_EQ(oplen("gen --n 3 --k 4 --seed 4 --out " + path("x.json")).code, 0);
  // pinching needs n | k
  EXPECT_EQ(oplen("factor --instance " + path("x.json") + " --construction t13").code, 2);
  EXPECT_EQ(oplen("factor --instance " + path("x.json") + " --construction nonsense").code, 2);
  EXPECT_EQ(oplen("factor --instance " + path("missing.json")).code, 2);
  write("bad.json", "{\"n\": 2}");
  EXPECT_EQ(oplen("factor --instance " + path("bad.json")).code, 2);
  ASSERT_EQ(oplen("gen --n 2 --k 4 --seed 4 --out " + path("y.json")).code, 0);
  ASSERT_EQ(oplen("factor --instance " + path("y.json") + " --out " + path("c.json")).code, 0);
  EXPECT_EQ(oplen("verify --instance " + path("x.json") + " --cert " + path("c.json")).code, 2);
  EXPECT_EQ(oplen("no-such-command").code, 2);
  EXPECT_EQ(oplen("").code, 2);
}

TEST_F(Cli, BenchIsReproducibleAndWithinBounds) {
  const auto a = oplen("bench --n-range 2:3 --k 2 --trials 2 --seed 5");
  const auto b = oplen("bench --n-range 2:3 --k 2 --trials 2 --seed 5");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "construction,n,k,trial,cost,norm,ratio");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3 * 2 * 2);
  const auto timed = oplen("bench --n-range 2 --k 2 --trials 1 --timing");
  EXPECT_EQ(timed.out.substr(0, timed.out.find('\n')), "construction,n,k,trial,cost,norm,ratio,runtime_ms");
}

TEST_F(Cli, CbReports) {
  const auto id = oplen("cb --xi-spec identity:2 --restarts 5");
  EXPECT_EQ(id.code, 0);
  EXPECT_NEAR(json::parse(id.out)["lower"].get<double>(), 1.0, 1e-12);
  const auto d = oplen("cb --xi-spec diag:2,1 --level 2 --restarts 50 --seed 1");
  EXPECT_EQ(d.code, 0);
  EXPECT_GE(json::parse(d.out)["lower"].get<double>(), 1.96);
  EXPECT_EQ(oplen("cb --xi-spec diag:1,0").code, 2);
  EXPECT_EQ(oplen("cb --xi-spec weird:3").code, 2);
}

TEST_F(Cli, UniformityDigestIsStable) {
  const auto a = oplen("uniformity --construction length1 --n 2 --k 2 --trials 10 --seed 1");
  const auto b = oplen("uniformity --construction length1 --n 2 --k 2 --trials 10 --seed 99");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(json::parse(a.out)["digest"], json::parse(b.out)["digest"]);
  EXPECT_EQ(oplen("uniformity --construction sub19 --n 2 --k 2 --trials 3").code, 0);
}
