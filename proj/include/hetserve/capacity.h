#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hetserve/config.h"
#include "hetserve/latency.h"

namespace hetserve {

// Standalone service rates (QPS) derived from the latency curves and a batch window.
//
// Every auxiliary type is credited with the QoS region of the most permissive one
// (batches below s'), which makes the bound optimistic for weaker types.
struct RateProfile {
  int base_type = 0;
  std::vector<int> s;          // per type: largest QoS-feasible batch (max_batch for base)
  std::vector<double> f;       // per type: fraction of the window below s (1 for base)
  double f_prime = 0.0;        // max f over auxiliary types
  int s_prime = 0;             // the s that achieves f_prime
  double q_base = 0.0;         // base over the whole window
  double q_base_splus = 0.0;   // base over batches >= s'
  std::vector<double> q_aux;   // per type over batches < s'; 0 for base and infeasible types
};

RateProfile rate_profile(const Catalog& catalog, const QoSSpec& qos, std::span<const int> window);

// Throughput upper bound for one configuration. With
//   C = sum_i v_i Qa_i (1 - f') / f'
// the base is the bottleneck when u Qb+ <= C, giving u Qb+ / (1 - f'); otherwise the
// auxiliaries saturate and the base slack serves the full mix:
//   sum_i v_i Qa_i / f' + (u Qb+ - C) / (u Qb+) * u Qb.
// f' = 0 gives u Qb and f' = 1 gives sum_i v_i Qa_i + u Qb.
double upper_bound(const HeterogeneousConfig& config, const RateProfile& profile);

// All configurations with at least one base instance and cost <= budget, in
// lexicographic order of the count vector.
std::vector<HeterogeneousConfig> enumerate_configs(const Catalog& catalog, double budget_per_hour);

struct UpperBoundEntry {
  HeterogeneousConfig config;
  double qps_max = 0.0;
  double cost_per_hour = 0.0;
};

// Sorted by qps_max descending, ties by lexicographic config.
using UpperBoundTable = std::vector<UpperBoundEntry>;

UpperBoundTable rank_configs(std::span<const HeterogeneousConfig> configs, const RateProfile& profile,
                             const Catalog& catalog);

enum class ChoiceRule { kHomogeneous, kTopAgreement, kMinSse };

const char* to_string(ChoiceRule rule);

struct ConfigChoice {
  HeterogeneousConfig config;
  double qps_max = 0.0;
  ChoiceRule rule = ChoiceRule::kTopAgreement;
  std::size_t candidates = 0;
};

// A table without any auxiliary instance (single-type catalog) yields its top entry, the
// largest affordable pool. If the top `agree_k` entries share the base count, take the
// first. Otherwise pick, among
// the top `sse_k`, the config with the least summed squared distance to the others
// (ties: higher bound, then lexicographic).
ConfigChoice choose_config(const UpperBoundTable& table, int base_type, std::size_t agree_k = 3,
                           std::size_t sse_k = 10);

// Columns: one per catalog type (named), cost_per_hour, qps_max.
void write_upper_bound_csv(std::ostream& out, const UpperBoundTable& table, const Catalog& catalog);

}  // namespace hetserve
