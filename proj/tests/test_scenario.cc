#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hetserve/errors.h"
#include "hetserve/scenario.h"

using namespace hetserve;
namespace fs = std::filesystem;

namespace {

const char* kValid = R"({
  "name": "tiny",
  "seed": 4,
  "catalog": [
    {"name": "gpu", "price_per_hour": 0.5, "role": "base", "intercept_ms": 10, "slope_ms_per_request": 0.1},
    {"name": "cpu", "price_per_hour": 0.15, "role": "auxiliary", "intercept_ms": 5, "slope_ms_per_request": 0.5}
  ],
  "qos": {"t_qos_ms": 120},
  "budget_per_hour": 1.5,
  "workload": {"rate_qps": 30, "max_batch": 500, "batch_dist": {"kind": "gaussian", "mean": 100, "std": 20}},
  "trial": {"trial_queries": 3000, "latency_noise": 0.05}
})";

std::string error_of(const std::string& text, const fs::path& dir = {}) {
  try {
    parse_scenario(text, dir);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hetserve_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir / "traces");
  return dir;
}

}  // namespace

TEST(Scenario, ParsesFieldsAndDefaults) {
  auto sc = parse_scenario(kValid);
  EXPECT_EQ(sc.name, "tiny");
  EXPECT_EQ(sc.seed, 4u);
  ASSERT_EQ(sc.catalog.size(), 2u);
  EXPECT_EQ(sc.catalog.base_type(), 0);
  EXPECT_EQ(sc.catalog.max_batch(), 500);
  EXPECT_EQ(sc.catalog[1].name, "cpu");
  EXPECT_DOUBLE_EQ(sc.catalog[1].latency_curve.slope_ms_per_request, 0.5);
  EXPECT_DOUBLE_EQ(sc.qos.t_qos_ms, 120);
  EXPECT_DOUBLE_EQ(sc.qos.xi, 0.98);
  EXPECT_DOUBLE_EQ(sc.qos.percentile, 99);
  EXPECT_DOUBLE_EQ(sc.budget_per_hour, 1.5);
  EXPECT_EQ(sc.workload.num_queries, 2000u);
  EXPECT_EQ(sc.workload.seed, 4u);
  ASSERT_TRUE(std::holds_alternative<GaussianBatches>(sc.workload.batch_dist));
  EXPECT_DOUBLE_EQ(std::get<GaussianBatches>(sc.workload.batch_dist).std, 20);
  EXPECT_FALSE(sc.policy.drs_threshold.has_value());
  EXPECT_EQ(sc.policy.drs_step, 25);
  EXPECT_EQ(sc.trial.trial_queries, 3000u);
  EXPECT_DOUBLE_EQ(sc.trial.latency_noise, 0.05);
  EXPECT_EQ(sc.trial.window_size, kDefaultWindowSize);
  EXPECT_EQ(sc.digest.size(), 16u);
}

TEST(Scenario, UnknownKeyNamesItsPath) {
  auto msg = error_of(replace(kValid, "\"mean\": 100", "\"mean\": 100, \"median\": 3"));
  EXPECT_NE(msg.find("/workload/batch_dist/median"), std::string::npos) << msg;
  msg = error_of(replace(kValid, "\"name\": \"tiny\"", "\"name\": \"tiny\", \"extra\": 1"));
  EXPECT_NE(msg.find("/extra"), std::string::npos) << msg;
}

TEST(Scenario, SyntaxErrorCarriesLine) {
  auto msg = error_of(replace(kValid, "\"budget_per_hour\": 1.5,", "\"budget_per_hour\": 1.5,,"));
  EXPECT_NE(msg.find("line 9"), std::string::npos) << msg;
}

TEST(Scenario, SemanticErrors) {
  EXPECT_NE(error_of(replace(kValid, "\"role\": \"auxiliary\"", "\"role\": \"helper\"")).find("/catalog/1/role"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kValid, "\"role\": \"auxiliary\"", "\"role\": \"base\"")).find("/catalog"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kValid, "\"t_qos_ms\": 120", "\"t_qos_ms\": -1")).find("/qos"), std::string::npos);
  EXPECT_NE(error_of(replace(kValid, "\"std\": 20", "\"std\": 0")).find("/workload/batch_dist/std"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kValid, "\"rate_qps\": 30", "\"rate_qps\": \"fast\"")).find("/workload/rate_qps"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kValid, "\"budget_per_hour\": 1.5,", "")).find("/budget_per_hour"), std::string::npos);
  EXPECT_NE(error_of(replace(kValid, "\"kind\": \"gaussian\"", "\"kind\": \"zipf\"")).find("zipf"),
            std::string::npos);
}

TEST(Scenario, TracePathIsRelativeToTheFile) {
  auto dir = temp_dir("trace");
  std::ofstream(dir / "traces" / "t.csv") << "batch_size\n5\n700\n40\n";
  auto text = replace(kValid, R"({"kind": "gaussian", "mean": 100, "std": 20})",
                      R"({"kind": "trace", "path": "traces/t.csv"})");
  std::ofstream(dir / "s.json") << text;
  auto sc = load_scenario(dir / "s.json");
  const auto& trace = std::get<TraceBatches>(sc.workload.batch_dist);
  EXPECT_EQ(trace.batches, (std::vector<int>{5, 500, 40}));  // clamped to max_batch

  auto msg = error_of(replace(text, "traces/t.csv", "traces/missing.csv"), dir);
  EXPECT_NE(msg.find("/workload/batch_dist/path"), std::string::npos) << msg;
  EXPECT_THROW(load_scenario(dir / "nope.json"), IoError);
}

TEST(Scenario, DigestTracksFileAndTraceBytes) {
  EXPECT_EQ(parse_scenario(kValid).digest, parse_scenario(kValid).digest);
  EXPECT_NE(parse_scenario(kValid).digest, parse_scenario(replace(kValid, "\"seed\": 4", "\"seed\": 5")).digest);

  auto dir = temp_dir("digest");
  auto text = replace(kValid, R"({"kind": "gaussian", "mean": 100, "std": 20})",
                      R"({"kind": "trace", "path": "traces/t.csv"})");
  std::ofstream(dir / "traces" / "t.csv") << "5\n6\n";
  auto a = parse_scenario(text, dir).digest;
  std::ofstream(dir / "traces" / "t.csv") << "5\n7\n";
  auto b = parse_scenario(text, dir).digest;
  EXPECT_NE(a, b);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Scenario, ShippedScenariosLoad) {
  for (auto name : {"rm2_like.json", "bimodal.json", "search_space.json"}) {
    auto sc = load_scenario(fs::path(HETSERVE_SCENARIO_DIR) / name);
    EXPECT_FALSE(sc.name.empty()) << name;
    EXPECT_GE(sc.catalog.size(), 2u) << name;
  }
}
