#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kCli = HETSERVE_CLI_PATH;

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "hetserve_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Result {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result cli(const std::string& args) {
  auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  std::string cmd = "'" + kCli.string() + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_scenario(const std::string& name, const std::string& catalog, double budget) {
  auto path = workdir() / (name + ".json");
  std::ofstream(path) << R"({"name": ")" << name << R"(", "seed": 2, "catalog": [)" << catalog
                      << R"(], "qos": {"t_qos_ms": 200}, "budget_per_hour": )" << budget
                      << R"(, "workload": {"rate_qps": 20, "num_queries": 400, "max_batch": 500,
                           "batch_dist": {"kind": "lognormal", "mu": 4, "sigma": 0.6}},
                           "trial": {"trial_queries": 400, "window_size": 500}})";
  return path;
}

const std::string kGpu =
    R"({"name": "gpu", "price_per_hour": 0.5, "role": "base", "intercept_ms": 10, "slope_ms_per_request": 0.1})";
const std::string kCpu =
    R"({"name": "cpu", "price_per_hour": 0.15, "role": "auxiliary", "intercept_ms": 5, "slope_ms_per_request": 0.5})";

}  // namespace

TEST(Cli, SimulateCompletesEveryQuery) {
  auto sc = write_scenario("single", kGpu, 1.2);
  auto r = cli("simulate --scenario '" + sc.string() + "' --config 1 --policy ribbon");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["completed"], 400);
  EXPECT_EQ(j["num_queries"], 400);
  EXPECT_EQ(j["config"], "1");
  EXPECT_EQ(j["scenario"]["name"], "single");
  EXPECT_EQ(j["scenario"]["digest"].get<std::string>().size(), 16u);
}

TEST(Cli, UnknownPolicyIsAUsageError) {
  auto sc = write_scenario("two", kGpu + "," + kCpu, 1.2);
  auto r = cli("simulate --scenario '" + sc.string() + "' --config 1,1 --policy fifo");
  EXPECT_EQ(r.code, 2);
  for (auto name : {"kairos", "ribbon", "drs", "clkwrk"}) EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
}

TEST(Cli, BadArgumentsAreUsageErrors) {
  auto sc = write_scenario("two", kGpu + "," + kCpu, 1.2);
  EXPECT_EQ(cli("simulate --scenario '" + sc.string() + "' --config 1,x").code, 2);
  EXPECT_EQ(cli("simulate --scenario '" + sc.string() + "' --config 0,2").code, 2);
  EXPECT_EQ(cli("simulate --scenario '" + sc.string() + "' --config 1,1,1").code, 2);
  EXPECT_EQ(cli("simulate --config 1,1").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("plan --scenario '" + (workdir() / "missing.json").string() + "' --out-dir x").code, 2);
}

TEST(Cli, BudgetBelowBasePriceIsInfeasible) {
  auto sc = write_scenario("poor", kGpu + "," + kCpu, 0.3);
  auto r = cli("plan --scenario '" + sc.string() + "' --out-dir '" + (workdir() / "poor").string() + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("budget"), std::string::npos) << r.err;
}

TEST(Cli, PlanOnSingleTypeCatalogTakesMostInstances) {
  auto sc = write_scenario("homog", kGpu, 1.6);
  auto dir = workdir() / "homog";
  auto r = cli("plan --scenario '" + sc.string() + "' --out-dir '" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(dir / "plan.json"));
  EXPECT_EQ(j["chosen_config"], "3");
  EXPECT_EQ(j["search_space"], 3);
  auto csv = slurp(dir / "upper_bounds.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "gpu,cost_per_hour,qps_max");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, SearchOverSingleConfigUsesOneEvaluation) {
  auto sc = write_scenario("one", kGpu, 0.6);
  auto dir = workdir() / "one";
  auto r = cli("search --scenario '" + sc.string() + "' --out-dir '" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(dir / "search_summary.json"));
  EXPECT_EQ(j["evaluations_used"], 1);
  EXPECT_EQ(j["best_config"], "1");
  auto csv = slurp(dir / "search_trace.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,config,qps,live_set_size");
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
  auto sc = write_scenario("repeat", kGpu + "," + kCpu, 1.2);
  std::string runs[2];
  for (int k = 0; k < 2; ++k) {
    auto dir = workdir() / ("repeat" + std::to_string(k));
    ASSERT_EQ(cli("plan --scenario '" + sc.string() + "' --out-dir '" + dir.string() + "'").code, 0);
    ASSERT_EQ(cli("search --scenario '" + sc.string() + "' --algo random --seed 3 --out-dir '" + dir.string() + "'")
                  .code,
              0);
    auto cmp = cli("compare --scenario '" + sc.string() + "' --config 1,2");
    ASSERT_EQ(cmp.code, 0) << cmp.err;
    runs[k] = slurp(dir / "plan.json") + slurp(dir / "upper_bounds.csv") + slurp(dir / "search_trace.csv") +
              slurp(dir / "search_summary.json") + cmp.out;
  }
  EXPECT_EQ(runs[0], runs[1]);
  EXPECT_NE(runs[0].find("policy,allowable_qps,drs_threshold,tuning_evaluations"), std::string::npos);
}
