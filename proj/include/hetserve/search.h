#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "hetserve/capacity.h"
#include "hetserve/config.h"

namespace hetserve {

// Measured throughput of one configuration. Must be deterministic per config.
using Evaluator = std::function<double(const HeterogeneousConfig&)>;

struct SearchStep {
  std::size_t iteration = 0;  // 1-based
  HeterogeneousConfig config;
  double qps = 0.0;
  double upper_bound = 0.0;  // 0 when the searcher has no bound (random search)
  std::size_t live_after = 0;
};

struct SearchTrace {
  std::vector<SearchStep> steps;
  HeterogeneousConfig best_config;
  double best_qps = 0.0;
  std::size_t evaluations_used = 0;
  std::size_t pruned_by_bound = 0;
  std::size_t pruned_as_subconfig = 0;
  std::size_t bound_breaches = 0;  // measured qps above its own bound
};

// Walks the table in descending bound order. After each evaluation the evaluated config
// leaves the live set, then every live config with bound <= best-so-far is filtered and
// every live sub-configuration of the evaluated one is pruned.
SearchTrace kairos_plus(const UpperBoundTable& table, const Evaluator& evaluate);

// Evaluates a seeded uniform shuffle of the configs, optionally pruning sub-configurations
// of each evaluated config.
SearchTrace random_search(std::span<const HeterogeneousConfig> configs, const Evaluator& evaluate,
                          std::uint64_t seed, bool with_pruning);

// Columns: iteration, config, qps, live_set_size.
void write_trace_csv(std::ostream& out, const SearchTrace& trace);

}  // namespace hetserve
