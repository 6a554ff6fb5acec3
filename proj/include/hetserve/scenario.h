#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hetserve/latency.h"
#include "hetserve/workload.h"

namespace hetserve {

struct PolicyParams {
  std::optional<int> drs_threshold;  // tuned by hill climbing when absent
  int drs_step = 25;
  double penalty_multiplier = 10.0;
  double controller_overhead_ms = 0.0;
};

struct TrialSettings {
  std::size_t trial_queries = 5000;
  double resolution_qps = 1.0;
  double latency_noise = 0.0;  // std as a fraction of mean latency; 0 disables
  std::size_t window_size = kDefaultWindowSize;
};

// Everything one experiment needs, loaded from a JSON file.
struct Scenario {
  std::string name;
  std::string description;
  Catalog catalog;
  QoSSpec qos;
  double budget_per_hour = 0.0;
  WorkloadSpec workload;  // rate_qps and num_queries apply to `simulate`
  PolicyParams policy;
  TrialSettings trial;
  std::uint64_t seed = 1;
  std::string digest;  // FNV-1a 64 over the file bytes and any referenced trace, hex
};

// Parses scenario JSON. `base_dir` resolves relative trace paths. Syntax errors carry
// line and column; semantic errors carry the JSON path of the offending value.
// Throws FormatError or ConfigurationError.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace hetserve
