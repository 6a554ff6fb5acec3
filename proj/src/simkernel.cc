#include "hetserve/simkernel.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>

#include "hetserve/errors.h"

namespace hetserve {
namespace {

struct Slot {
  Query query;
  double predicted_ms = 0.0;
};

struct Running {
  Query query;
  double service_ms = 0.0;
};

struct Completion {
  double time;
  std::size_t instance;
  bool operator>(const Completion& o) const {
    if (time != o.time) return time > o.time;
    return instance > o.instance;
  }
};

class Kernel {
 public:
  Kernel(const HeterogeneousConfig& config, const Catalog& catalog, DispatchPolicy& policy,
         const QoSSpec& qos, const SimSettings& settings, std::uint64_t seed)
      : catalog_(catalog),
        policy_(policy),
        qos_(qos),
        settings_(settings),
        predictor_(catalog.size(), catalog.max_batch()),
        coefficients_(heterogeneity_coefficients(catalog)),
        rng_(mix_seed(seed, 0x6e6f697365)) {
    if (settings.predictor_prior_from_catalog)
      for (const auto& t : catalog.types()) predictor_.set_prior(t.type_id, t.latency_curve);
    int id = 0;
    for (std::size_t t = 0; t < catalog.size(); ++t) {
      for (int k = 0; k < config.count(t); ++k) {
        states_.push_back(InstanceState{id++, static_cast<int>(t), 0.0, false, 0});
      }
    }
    running_.resize(states_.size());
    pending_.resize(states_.size());
    busy_ms_.assign(states_.size(), 0.0);
  }

  SimReport run(std::span<const Query> stream) {
    const std::size_t n = stream.size();
    const std::size_t fail_at = settings_.stop_after_violations.value_or(n + 1);
    latencies_.reserve(n);

    std::size_t next_arrival = 0;
    double now = 0.0;
    while (next_arrival < n || !completions_.empty()) {
      // Completions precede arrivals at equal timestamps.
      bool take_completion =
          !completions_.empty() &&
          (next_arrival >= n || completions_.top().time <= stream[next_arrival].arrival_time);
      if (take_completion) {
        auto ev = completions_.top();
        completions_.pop();
        now = ev.time;
        finish(ev.instance, now);
      } else {
        const Query& q = stream[next_arrival++];
        now = q.arrival_time;
        Query queued = q;
        queued.first_queued_time = q.arrival_time;
        queue_.push_back(queued);
      }
      if (!queue_.empty()) dispatch_round(now);
      if (violations_ >= fail_at) {
        truncated_ = true;
        break;
      }
    }
    if (!truncated_ && !queue_.empty())
      throw InvariantViolation("policy '" + policy_.name() + "' left " + std::to_string(queue_.size()) +
                               " queries undispatched");
    return report(n, stream);
  }

 private:
  void dispatch_round(double now) {
    PolicyContext ctx{queue_, states_, predictor_, coefficients_, catalog_, qos_, now};
    auto commits = policy_.dispatch(ctx);
    if (commits.empty()) return;

    std::vector<char> taken(queue_.size(), 0);
    for (const auto& c : commits) {
      if (c.queue_index >= queue_.size())
        throw InvariantViolation("commitment references a query outside the central queue");
      if (c.instance_index >= states_.size())
        throw InvariantViolation("commitment references an unknown instance");
      if (taken[c.queue_index]) throw InvariantViolation("query committed twice in one round");
      taken[c.queue_index] = 1;
    }
    for (const auto& c : commits) {
      if (c.forced) ++forced_;
      assign(queue_[c.queue_index], c.instance_index, now);
    }
    std::size_t w = 0;
    for (std::size_t r = 0; r < queue_.size(); ++r)
      if (!taken[r]) queue_[w++] = queue_[r];
    queue_.resize(w);
  }

  void assign(const Query& q, std::size_t j, double now) {
    auto& st = states_[j];
    double pred = predictor_.predict(st.type_id, q.batch_size);
    if (!st.serving) {
      start(q, pred, j, now);
    } else {
      pending_[j].push_back(Slot{q, pred});
      ++st.committed;
      st.busy_until = std::max(st.busy_until, now) + pred / 1000.0;
    }
  }

  void start(const Query& q, double predicted_ms, std::size_t j, double now) {
    auto& st = states_[j];
    const auto& type = catalog_[static_cast<std::size_t>(st.type_id)];
    double service = true_latency(type, q.batch_size, settings_.noise, rng_, catalog_.max_batch());
    double occupied = service + settings_.controller_overhead_ms;
    running_[j] = Running{q, service};
    st.serving = true;
    double backlog = 0.0;
    for (const auto& s : pending_[j]) backlog += s.predicted_ms;
    st.busy_until = now + (predicted_ms + settings_.controller_overhead_ms + backlog) / 1000.0;
    busy_ms_[j] += occupied;
    completions_.push(Completion{now + occupied / 1000.0, j});
  }

  void finish(std::size_t j, double now) {
    auto& st = states_[j];
    const Running done = running_[j];
    st.serving = false;
    double latency_ms = (now - done.query.arrival_time) * 1000.0;
    latencies_.push_back(latency_ms);
    if (latency_ms > qos_.t_qos_ms) ++violations_;
    last_completion_ = std::max(last_completion_, now);
    predictor_.observe(st.type_id, done.query.batch_size, done.service_ms);

    if (!pending_[j].empty()) {
      Slot next = pending_[j].front();
      pending_[j].pop_front();
      --st.committed;
      start(next.query, next.predicted_ms, j, now);
    } else {
      st.busy_until = now;
    }
  }

  SimReport report(std::size_t n, std::span<const Query> stream) {
    SimReport r;
    r.policy = policy_.name();
    r.num_queries = n;
    r.completed = latencies_.size();
    r.qos_violations = violations_;
    r.forced_dispatches = forced_;
    r.percentile = qos_.percentile;
    r.truncated = truncated_;
    r.makespan_s = last_completion_;
    if (settings_.offered_rate_qps > 0.0) {
      r.offered_rate_qps = settings_.offered_rate_qps;
    } else if (n > 0 && stream.back().arrival_time > 0.0) {
      r.offered_rate_qps = static_cast<double>(n) / stream.back().arrival_time;
    }
    if (!latencies_.empty()) {
      std::vector<double> sorted = latencies_;
      std::sort(sorted.begin(), sorted.end());
      auto rank = static_cast<std::size_t>(std::ceil(qos_.percentile / 100.0 * sorted.size()));
      r.p99_latency_ms = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
      double sum = 0.0;
      for (double l : latencies_) sum += l;
      r.mean_latency_ms = sum / latencies_.size();
    }
    if (r.makespan_s > 0.0)
      r.achieved_goodput_qps = static_cast<double>(r.completed - r.qos_violations) / r.makespan_s;

    r.utilization.assign(catalog_.size(), 0.0);
    std::vector<int> per_type(catalog_.size(), 0);
    for (std::size_t j = 0; j < states_.size(); ++j) {
      auto t = static_cast<std::size_t>(states_[j].type_id);
      r.utilization[t] += busy_ms_[j];
      ++per_type[t];
    }
    for (std::size_t t = 0; t < catalog_.size(); ++t) {
      if (per_type[t] > 0 && r.makespan_s > 0.0)
        r.utilization[t] /= per_type[t] * r.makespan_s * 1000.0;
      else
        r.utilization[t] = 0.0;
    }
    return r;
  }

  const Catalog& catalog_;
  DispatchPolicy& policy_;
  const QoSSpec& qos_;
  const SimSettings& settings_;
  LatencyPredictor predictor_;
  std::vector<double> coefficients_;
  std::mt19937_64 rng_;

  std::vector<InstanceState> states_;
  std::vector<Running> running_;
  std::vector<std::deque<Slot>> pending_;
  std::vector<double> busy_ms_;
  std::vector<Query> queue_;
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> completions_;

  std::vector<double> latencies_;
  std::size_t violations_ = 0;
  std::size_t forced_ = 0;
  double last_completion_ = 0.0;
  bool truncated_ = false;
};

}  // namespace

SimReport run(const HeterogeneousConfig& config, const Catalog& catalog, std::span<const Query> stream,
              DispatchPolicy& policy, const QoSSpec& qos, const SimSettings& settings, std::uint64_t seed) {
  validate(config, catalog);
  validate(qos);
  if (stream.empty()) throw ParameterError("query stream is empty");
  for (std::size_t i = 1; i < stream.size(); ++i)
    if (stream[i].arrival_time < stream[i - 1].arrival_time)
      throw ParameterError("query stream must be ordered by arrival time");

  Kernel kernel(config, catalog, policy, qos, settings, seed);
  auto report = kernel.run(stream);
  report.seed = seed;
  return report;
}

const char* to_string(Verdict v) { return v == Verdict::kPass ? "pass" : "fail"; }

Verdict qos_verdict(const SimReport& report, const QoSSpec& qos) {
  if (report.completed == 0) throw StateError("qos_verdict: report has no completions");
  if (report.truncated) return Verdict::kFail;
  return report.p99_latency_ms <= qos.t_qos_ms ? Verdict::kPass : Verdict::kFail;
}

std::size_t violations_to_fail(std::size_t num_queries, double percentile) {
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(num_queries)));
  rank = std::clamp<std::size_t>(rank, 1, num_queries);
  return num_queries - rank + 1;
}

AllowableResult allowable_throughput(const HeterogeneousConfig& config, const Catalog& catalog,
                                     DispatchPolicy& policy, const WorkloadTemplate& workload,
                                     const QoSSpec& qos, const SimSettings& settings,
                                     const TrialParams& params) {
  validate(config, catalog);
  if (params.trial_queries < 1) throw ParameterError("trial_queries must be positive");
  if (!(params.resolution_qps > 0.0)) throw ParameterError("resolution_qps must be positive");

  WorkloadSpec spec{1.0, workload.batch_dist, params.trial_queries, workload.seed, workload.max_batch};
  const auto unit_stream = generate_stream(spec);
  std::vector<Query> stream(unit_stream.size());

  SimSettings trial_settings = settings;
  trial_settings.stop_after_violations = violations_to_fail(params.trial_queries, qos.percentile);
  const std::uint64_t run_seed = mix_seed(workload.seed, 0x7472);

  AllowableResult result;
  auto passes = [&](double rate) {
    for (std::size_t i = 0; i < stream.size(); ++i) {
      stream[i] = unit_stream[i];
      stream[i].arrival_time = unit_stream[i].arrival_time / rate;
      stream[i].first_queued_time = stream[i].arrival_time;
    }
    trial_settings.offered_rate_qps = rate;
    ++result.trials;
    auto report = run(config, catalog, stream, policy, qos, trial_settings, run_seed);
    return qos_verdict(report, qos) == Verdict::kPass;
  };

  double rate = params.start_rate_qps;
  if (!passes(rate)) return result;
  double lo = rate, hi = rate;
  while (true) {
    hi = lo * 2.0;
    if (hi > params.max_rate_qps) {
      result.qps = lo;
      return result;
    }
    if (!passes(hi)) break;
    lo = hi;
  }
  while (hi - lo > params.resolution_qps) {
    double mid = 0.5 * (lo + hi);
    if (passes(mid))
      lo = mid;
    else
      hi = mid;
  }
  result.qps = lo;
  return result;
}

}  // namespace hetserve
