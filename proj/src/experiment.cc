#include "hetserve/experiment.h"

#include <cstdlib>
#include <string_view>

#include "hetserve/errors.h"

namespace hetserve {

std::size_t threads_from_env() {
  if (const char* env = std::getenv("HETSERVE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Experiment::Experiment(Scenario scenario) : sc_(std::move(scenario)) {
  WorkloadSpec w = sc_.workload;
  w.num_queries = sc_.trial.window_size;
  w.seed = mix_seed(sc_.seed, 0x77696e646f77);
  window_ = sample_batches(w);
  profile_ = rate_profile(sc_.catalog, sc_.qos, window_);
  configs_ = enumerate_configs(sc_.catalog, sc_.budget_per_hour);
  table_ = rank_configs(configs_, profile_, sc_.catalog);
}

SimSettings Experiment::sim_settings() const {
  SimSettings s;
  if (sc_.trial.latency_noise > 0.0) s.noise = LatencyNoise{sc_.trial.latency_noise};
  s.controller_overhead_ms = sc_.policy.controller_overhead_ms;
  return s;
}

TrialParams Experiment::trial_params() const {
  TrialParams p;
  p.trial_queries = sc_.trial.trial_queries;
  p.resolution_qps = sc_.trial.resolution_qps;
  return p;
}

PolicyOptions Experiment::policy_options(std::optional<int> drs_threshold) const {
  PolicyOptions o;
  o.penalty.multiplier = sc_.policy.penalty_multiplier;
  o.drs_threshold = drs_threshold.value_or(sc_.policy.drs_threshold.value_or(0));
  return o;
}

WorkloadTemplate Experiment::workload_for(const HeterogeneousConfig& config) const {
  return WorkloadTemplate{sc_.workload.batch_dist, sc_.workload.max_batch, mix_seed(sc_.seed, config.hash())};
}

double Experiment::allowable(const HeterogeneousConfig& config, const std::string& policy) const {
  const bool cache = policy == "kairos";
  if (cache) {
    std::lock_guard lock(mu_);
    if (auto it = kairos_cache_.find(config); it != kairos_cache_.end()) return it->second;
  }
  if (policy == "oracle") return oracle_qps(config);
  auto p = make_policy(policy, policy_options());
  double qps = allowable_throughput(config, sc_.catalog, *p, workload_for(config), sc_.qos, sim_settings(),
                                    trial_params())
                   .qps;
  if (cache) {
    std::lock_guard lock(mu_);
    kairos_cache_.emplace(config, qps);
  }
  return qps;
}

std::vector<double> Experiment::kairos_qps_all(const std::vector<HeterogeneousConfig>& configs) const {
  return parallel_map<double>(configs.size(), [&](std::size_t i) { return kairos_qps(configs[i]); });
}

PolicyResult Experiment::tuned_drs(const HeterogeneousConfig& config) const {
  PolicyResult r{"drs", 0.0, sc_.policy.drs_threshold, 0};
  if (!sc_.policy.drs_threshold) {
    auto tuning = drs_tune_threshold(config, sc_.catalog, workload_for(config), sc_.qos, sim_settings(),
                                     trial_params(), sc_.policy.drs_step);
    r.drs_threshold = tuning.threshold;
    r.tuning_evaluations = tuning.evaluations;
    for (auto [th, qps] : tuning.curve)
      if (th == tuning.threshold) r.qps = qps;
    if (tuning.evaluations > 0) return r;
  }
  DrsPolicy policy(r.drs_threshold.value_or(0));
  r.qps = allowable_throughput(config, sc_.catalog, policy, workload_for(config), sc_.qos, sim_settings(),
                               trial_params())
              .qps;
  return r;
}

double Experiment::oracle_qps(const HeterogeneousConfig& config) const {
  auto w = workload_for(config);
  WorkloadSpec spec{1.0, w.batch_dist, sc_.trial.trial_queries, w.seed, w.max_batch};
  return oracle_throughput(config, sc_.catalog, sample_batches(spec), sc_.qos);
}

std::vector<PolicyResult> Experiment::compare(const HeterogeneousConfig& config) const {
  validate(config, sc_.catalog);
  static constexpr std::string_view kOrder[] = {"kairos", "ribbon", "drs", "clkwrk", "oracle"};
  return parallel_map<PolicyResult>(std::size(kOrder), [&](std::size_t i) {
    std::string name(kOrder[i]);
    if (name == "drs") return tuned_drs(config);
    return PolicyResult{name, allowable(config, name), std::nullopt, 0};
  });
}

SearchTrace Experiment::search_kairos_plus() const {
  return kairos_plus(table_, [this](const HeterogeneousConfig& c) { return kairos_qps(c); });
}

SearchTrace Experiment::search_random(std::uint64_t seed, bool with_pruning) const {
  return random_search(configs_, [this](const HeterogeneousConfig& c) { return kairos_qps(c); }, seed,
                       with_pruning);
}

SimReport Experiment::simulate(const HeterogeneousConfig& config, const std::string& policy,
                               std::optional<double> rate_qps) const {
  validate(config, sc_.catalog);
  std::optional<int> threshold;
  if (policy == "drs") threshold = tuned_drs(config).drs_threshold;
  auto p = make_policy(policy, policy_options(threshold));
  WorkloadSpec spec = sc_.workload;
  if (rate_qps) spec.rate_qps = *rate_qps;
  if (!(spec.rate_qps > 0.0)) throw ParameterError("rate must be positive");
  auto stream = generate_stream(spec);
  SimSettings settings = sim_settings();
  settings.offered_rate_qps = spec.rate_qps;
  return run(config, sc_.catalog, stream, *p, sc_.qos, settings, mix_seed(sc_.seed, 0x73696d));
}

}  // namespace hetserve
