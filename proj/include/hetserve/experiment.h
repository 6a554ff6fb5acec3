#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hetserve/capacity.h"
#include "hetserve/policies.h"
#include "hetserve/scenario.h"
#include "hetserve/search.h"
#include "hetserve/simkernel.h"

namespace hetserve {

// Worker count: HETSERVE_THREADS if set to a positive integer, else hardware concurrency.
std::size_t threads_from_env();

// Runs fn(0..n-1) on up to `threads` workers. Results are stored by index.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn, std::size_t threads = 0);

struct PolicyResult {
  std::string policy;
  double qps = 0.0;
  std::optional<int> drs_threshold;
  std::size_t tuning_evaluations = 0;
};

// Scenario-bound helpers shared by the CLI and the acceptance checks.
class Experiment {
 public:
  explicit Experiment(Scenario scenario);

  const Scenario& scenario() const { return sc_; }
  const Catalog& catalog() const { return sc_.catalog; }

  SimSettings sim_settings() const;
  TrialParams trial_params() const;
  PolicyOptions policy_options(std::optional<int> drs_threshold = std::nullopt) const;
  // Per-config workload: the seed is derived from the scenario seed and the config hash.
  WorkloadTemplate workload_for(const HeterogeneousConfig& config) const;

  const std::vector<int>& window() const { return window_; }
  const RateProfile& profile() const { return profile_; }
  const std::vector<HeterogeneousConfig>& configs() const { return configs_; }
  const UpperBoundTable& table() const { return table_; }
  ConfigChoice plan() const { return choose_config(table_, catalog().base_type()); }

  // Allowable throughput of one policy on one config; the result is cached for kairos.
  double allowable(const HeterogeneousConfig& config, const std::string& policy) const;
  double kairos_qps(const HeterogeneousConfig& config) const { return allowable(config, "kairos"); }
  // Fills the kairos cache for many configs in parallel and returns the values in order.
  std::vector<double> kairos_qps_all(const std::vector<HeterogeneousConfig>& configs) const;

  PolicyResult tuned_drs(const HeterogeneousConfig& config) const;
  double oracle_qps(const HeterogeneousConfig& config) const;
  // kairos, ribbon, drs (tuned unless the scenario fixes a threshold), clkwrk, oracle.
  std::vector<PolicyResult> compare(const HeterogeneousConfig& config) const;

  SearchTrace search_kairos_plus() const;
  SearchTrace search_random(std::uint64_t seed, bool with_pruning) const;

  SimReport simulate(const HeterogeneousConfig& config, const std::string& policy,
                     std::optional<double> rate_qps = std::nullopt) const;

 private:
  Scenario sc_;
  std::vector<int> window_;
  RateProfile profile_;
  std::vector<HeterogeneousConfig> configs_;
  UpperBoundTable table_;
  mutable std::mutex mu_;
  mutable std::map<HeterogeneousConfig, double> kairos_cache_;
};

}  // namespace hetserve

#include "hetserve/experiment_impl.h"
