#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "monoreg/commands.hpp"

namespace monoreg {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "monoreg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string scenario_path(const char* name) { return std::string(MONOREG_SCENARIO_DIR) + "/" + name; }

Json load_json(const char* name) {
  std::ifstream in(scenario_path(name));
  return Json::parse(in);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("monoreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const Json& doc) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }

  // Example 2 shortened to 0.2 s.
  std::string short_example2() const {
    Json j = load_json("example2.json");
    j["sim"]["tf"] = 0.2;
    j["sim"]["dt"] = 1e-3;
    j["sim"]["sample_every"] = 1;
    return write("short.json", j);
  }

  fs::path dir_;
};

TEST_F(CliTest, CheckExample2Passes) {
  const Result r = run_cli({"check", scenario_path("example2.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ok: true"), std::string::npos) << r.out;
}

TEST_F(CliTest, CheckExample1Passes) {
  const Result r = run_cli({"check", scenario_path("example1.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST_F(CliTest, CheckFailsOutsideRegulationInterval) {
  Json j = load_json("example1.json");
  j["reference"] = Json{{"constant", {1.0, 6.0}}};
  const Result r = run_cli({"check", write("f6.json", j), "--json"});
  EXPECT_EQ(r.code, 1);
  const Json report = Json::parse(r.out);
  EXPECT_FALSE(report["ok"].get<bool>());
  EXPECT_FALSE(report["regulation_condition"]["satisfied"].get<bool>());
}

TEST_F(CliTest, JsonKeyOrderIsStable) {
  const Result r = run_cli({"check", scenario_path("example2.json"), "--json"});
  ASSERT_EQ(r.code, 0);
  const Json report = Json::parse(r.out);
  std::vector<std::string> keys;
  for (const auto& item : report.items()) keys.push_back(item.key());
  ASSERT_GE(keys.size(), 3u);
  EXPECT_EQ(keys[0], "command");
  EXPECT_EQ(keys[1], "scenario");
  EXPECT_EQ(keys.back(), "failures");
  EXPECT_EQ(run_cli({"check", scenario_path("example2.json"), "--json"}).out, r.out);
}

TEST_F(CliTest, AnalyzeExample2) {
  const Result r = run_cli({"analyze", scenario_path("example2.json"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_TRUE(report["valid"].get<bool>());
  EXPECT_GT(report["B"].get<double>(), 0.0);
  EXPECT_NEAR(report["regulation_condition"]["lhs"].get<double>(), -9.2810, 5e-4);
}

TEST_F(CliTest, MalformedScenarioIsInputError) {
  const fs::path p = dir_ / "bad.json";
  std::ofstream(p) << "{\"plant\": [";
  EXPECT_EQ(run_cli({"check", p.string()}).code, 2);
  EXPECT_EQ(run_cli({"check", (dir_ / "missing.json").string()}).code, 2);
  Json j = load_json("example2.json");
  j["unexpected"] = true;
  EXPECT_EQ(run_cli({"analyze", write("unknown.json", j)}).code, 2);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate", scenario_path("example2.json")}).code, 2);
  EXPECT_EQ(run_cli({"sweep", short_example2()}).code, 2);
  EXPECT_EQ(run_cli({"sweep", short_example2(), "--epsilon", ""}).code, 2);
  EXPECT_EQ(run_cli({"sweep", short_example2(), "--epsilon", "1e-3,abc"}).code, 2);
  EXPECT_EQ(run_cli({"sweep", short_example2(), "--epsilon", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", short_example2(), "--plot"}).code, 2);
}

TEST_F(CliTest, SimulateToStdout) {
  const Result r = run_cli({"simulate", short_example2()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,x0,x1,x2,x3,y0,y1,u0,u1,v0,v1,H2,supply,distS,inOmega");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 201);
}

TEST_F(CliTest, SimulateWithPlot) {
  const std::string csv = (dir_ / "run.csv").string();
  const Result r = run_cli({"simulate", short_example2(), "--out", csv, "--plot"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(csv));
  ASSERT_TRUE(fs::exists(dir_ / "run.gp"));
  std::ifstream gp(dir_ / "run.gp");
  const std::string script((std::istreambuf_iterator<char>(gp)), std::istreambuf_iterator<char>());
  EXPECT_NE(script.find("run.csv"), std::string::npos);
  EXPECT_NE(script.find("multiplot"), std::string::npos);
}

TEST_F(CliTest, UnwritableOutputIsIoError) {
  const std::string bad = (dir_ / "no_such_dir" / "out.csv").string();
  EXPECT_EQ(run_cli({"simulate", short_example2(), "--out", bad}).code, 3);
  EXPECT_EQ(run_cli({"sweep", short_example2(), "--epsilon", "1e-3", "--out", bad}).code, 3);
}

TEST_F(CliTest, SimulateRefusesFailedCheckUnlessForced) {
  Json j = load_json("example1.json");
  j["reference"] = Json{{"constant", {1.0, 6.0}}};
  j["sim"]["tf"] = 0.1;
  j["sim"]["dt"] = 1e-3;
  const std::string path = write("f6.json", j);
  EXPECT_EQ(run_cli({"simulate", path}).code, 1);
  EXPECT_EQ(run_cli({"simulate", path, "--force"}).code, 0);
}

TEST_F(CliTest, SweepRowsInInputOrder) {
  const Result r = run_cli({"sweep", short_example2(), "--epsilon", "1e-2,1e-3,1e-4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("epsilon,beta,factor", 0), 0u);
  std::vector<double> eps;
  while (std::getline(lines, line)) {
    eps.push_back(std::stod(line.substr(0, line.find(','))));
    // Example 2 is never contraction-certified for LogSumExp.
    EXPECT_NE(line.find("contraction_invalid"), std::string::npos) << line;
  }
  EXPECT_EQ(eps, (std::vector<double>{1e-2, 1e-3, 1e-4}));
}

TEST_F(CliTest, NumericalAbortExitCode) {
  Json j = load_json("example2.json");
  j["plant"]["A"] = Json::array({{1e3, 0, 0, 0}, {0, 1e3, 0, 0}, {0, 0, 1e3, 0}, {0, 0, 0, 1e3}});
  j["sim"]["tf"] = 10.0;
  j["sim"]["dt"] = 0.1;
  EXPECT_EQ(run_cli({"simulate", write("unstable.json", j), "--force"}).code, 4);
}

TEST_F(CliTest, BinaryRuns) {
  const std::string cmd = std::string(MONOREG_CLI_PATH) + " check " + scenario_path("example2.json") + " --json";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string output;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  const int status = pclose(pipe);
  EXPECT_EQ(status, 0);
  EXPECT_TRUE(Json::parse(output)["ok"].get<bool>());
}

}  // namespace
}  // namespace monoreg
