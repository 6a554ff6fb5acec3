#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetserve/config.h"
#include "hetserve/latency.h"
#include "hetserve/matcher.h"
#include "hetserve/workload.h"

namespace hetserve {

// Everything a dispatch policy may look at during one dispatch round.
struct PolicyContext {
  std::span<const Query> queue;  // central queue, oldest first
  std::span<const InstanceState> instances;
  const LatencyPredictor& predictor;
  std::span<const double> coefficients;  // indexed by type_id
  const Catalog& catalog;
  const QoSSpec& qos;
  double now = 0.0;
};

struct Commitment {
  std::size_t queue_index = 0;
  std::size_t instance_index = 0;
  bool forced = false;  // dispatched although no QoS-respecting slot exists
};

class DispatchPolicy {
 public:
  virtual ~DispatchPolicy() = default;
  virtual std::string name() const = 0;
  // Commitments are final: a query handed to a busy instance waits in that
  // instance's FIFO and is never re-matched.
  virtual std::vector<Commitment> dispatch(const PolicyContext& ctx) = 0;
};

struct SimSettings {
  std::optional<LatencyNoise> noise;
  double controller_overhead_ms = 0.0;
  bool predictor_prior_from_catalog = true;
  // Recorded in the report; 0 means "estimate from the stream".
  double offered_rate_qps = 0.0;
  // Stop as soon as this many QoS violations happened (the verdict can no longer pass).
  std::optional<std::size_t> stop_after_violations;
};

struct SimReport {
  std::string policy;
  std::uint64_t seed = 0;
  double offered_rate_qps = 0.0;
  std::size_t num_queries = 0;
  std::size_t completed = 0;
  std::size_t qos_violations = 0;
  std::size_t forced_dispatches = 0;
  double percentile = 99.0;
  double p99_latency_ms = 0.0;  // at `percentile`, nearest rank, over end-to-end latency
  double mean_latency_ms = 0.0;
  double makespan_s = 0.0;
  double achieved_goodput_qps = 0.0;
  std::vector<double> utilization;  // per catalog type; 0 for absent types
  bool truncated = false;
};

SimReport run(const HeterogeneousConfig& config, const Catalog& catalog, std::span<const Query> stream,
              DispatchPolicy& policy, const QoSSpec& qos, const SimSettings& settings, std::uint64_t seed);

enum class Verdict { kPass, kFail };

const char* to_string(Verdict v);

// Pass iff the tail latency is within the unscaled QoS target.
Verdict qos_verdict(const SimReport& report, const QoSSpec& qos);

// Smallest violation count that makes the nearest-rank percentile exceed the target.
std::size_t violations_to_fail(std::size_t num_queries, double percentile);

// Batch-size half of a workload spec; the rate is chosen by the sweep.
struct WorkloadTemplate {
  BatchDistribution batch_dist = LogNormalBatches{};
  int max_batch = kDefaultMaxBatch;
  std::uint64_t seed = 1;
};

struct TrialParams {
  std::size_t trial_queries = 20000;
  double resolution_qps = 1.0;
  double start_rate_qps = 1.0;
  double max_rate_qps = 1e6;
};

struct AllowableResult {
  double qps = 0.0;
  std::size_t trials = 0;
};

// Geometric ramp (x2 from start_rate) until the first failing rate, then bisection down
// to resolution_qps. Every trial replays the same batch sequence and unit arrival gaps,
// rescaled to the trial rate.
AllowableResult allowable_throughput(const HeterogeneousConfig& config, const Catalog& catalog,
                                     DispatchPolicy& policy, const WorkloadTemplate& workload,
                                     const QoSSpec& qos, const SimSettings& settings,
                                     const TrialParams& params);

}  // namespace hetserve
