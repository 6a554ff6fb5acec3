#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetserve/config.h"
#include "hetserve/matcher.h"
#include "hetserve/simkernel.h"

namespace hetserve {

// QoS-penalized min-cost matching over the whole central queue and every instance.
// Non-penalized matched pairs are committed; the rest stay queued, except that
//  - a query nobody could serve in time any more (even on an idle instance of the
//    fastest pool type) is force-committed to its minimum-completion instance, and
//  - idle instances left unused by the matching take remaining queries they can serve
//    within the deadline (cheapest weighted cost first).
std::vector<Commitment> kairos_dispatch(const PolicyContext& ctx, PenaltySettings penalty = {});

// FCFS onto idle instances: base type first, then lower type_id, then lower instance id.
std::vector<Commitment> ribbon_dispatch(const PolicyContext& ctx);

// batch > threshold goes to the base class, otherwise to the auxiliary class. A class with
// no instances in the pool falls back to the other one. Queries wait for an idle
// instance of their class; within a class the longest-idle instance is used.
std::vector<Commitment> drs_dispatch(const PolicyContext& ctx, int threshold);

// Per-instance FIFO queues: each query joins the instance with the earliest predicted
// completion among those meeting xi * t_qos, or the earliest overall if none does.
std::vector<Commitment> clkwrk_dispatch(const PolicyContext& ctx);

class KairosPolicy final : public DispatchPolicy {
 public:
  explicit KairosPolicy(PenaltySettings penalty = {}) : penalty_(penalty) {}
  std::string name() const override { return "kairos"; }
  std::vector<Commitment> dispatch(const PolicyContext& ctx) override { return kairos_dispatch(ctx, penalty_); }

 private:
  PenaltySettings penalty_;
};

class RibbonPolicy final : public DispatchPolicy {
 public:
  std::string name() const override { return "ribbon"; }
  std::vector<Commitment> dispatch(const PolicyContext& ctx) override { return ribbon_dispatch(ctx); }
};

class DrsPolicy final : public DispatchPolicy {
 public:
  explicit DrsPolicy(int threshold) : threshold_(threshold) {}
  std::string name() const override { return "drs"; }
  int threshold() const { return threshold_; }
  std::vector<Commitment> dispatch(const PolicyContext& ctx) override { return drs_dispatch(ctx, threshold_); }

 private:
  int threshold_;
};

class ClkwrkPolicy final : public DispatchPolicy {
 public:
  std::string name() const override { return "clkwrk"; }
  std::vector<Commitment> dispatch(const PolicyContext& ctx) override { return clkwrk_dispatch(ctx); }
};

struct PolicyOptions {
  PenaltySettings penalty;
  int drs_threshold = 0;
};

// "kairos" | "ribbon" | "drs" | "clkwrk". "oracle" is not an online policy (see
// oracle_throughput). Throws ParameterError listing the valid names otherwise.
std::unique_ptr<DispatchPolicy> make_policy(std::string_view name, const PolicyOptions& options = {});

inline constexpr std::string_view kPolicyNames[] = {"kairos", "ribbon", "drs", "clkwrk", "oracle"};
std::string policy_names_joined();

// Clairvoyant reference: the population is sorted by batch size; whenever a base
// instance frees up it serves the largest remaining query, an auxiliary instance the
// smallest remaining one if that meets t_qos on its type. No waiting. Returns
// completions / makespan in queries per second.
double oracle_throughput(const HeterogeneousConfig& config, const Catalog& catalog,
                         std::span<const int> population, const QoSSpec& qos);

struct ThresholdTuning {
  int threshold = 0;
  std::size_t evaluations = 0;
  std::vector<std::pair<int, double>> curve;  // evaluated (threshold, qps) in order
};

// Hill climb over {0, step, 2*step, ...} <= max_batch starting at 0; stops at the first
// threshold whose successor is not strictly better.
ThresholdTuning hill_climb_threshold(const std::function<double(int)>& evaluate, int max_batch, int step,
                                     bool has_auxiliary = true);

// Hill climb with allowable_throughput under DrsPolicy as the objective.
ThresholdTuning drs_tune_threshold(const HeterogeneousConfig& config, const Catalog& catalog,
                                   const WorkloadTemplate& workload, const QoSSpec& qos,
                                   const SimSettings& settings, const TrialParams& params, int step = 25);

}  // namespace hetserve
