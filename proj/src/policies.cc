#include "hetserve/policies.h"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "hetserve/errors.h"

namespace hetserve {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> pool_types(std::span<const InstanceState> instances) {
  std::vector<int> types;
  for (const auto& s : instances)
    if (std::find(types.begin(), types.end(), s.type_id) == types.end()) types.push_back(s.type_id);
  return types;
}

}  // namespace

std::vector<Commitment> kairos_dispatch(const PolicyContext& ctx, PenaltySettings penalty) {
  const std::size_t m = ctx.queue.size(), n = ctx.instances.size();
  std::vector<Commitment> out;
  if (m == 0 || n == 0) return out;

  const auto matrix = build_cost_matrix(ctx.queue, ctx.instances, ctx.predictor, ctx.coefficients, ctx.qos,
                                        ctx.now, penalty);
  const auto plan = solve(matrix);

  std::vector<char> committed(m, 0), used(n, 0);
  for (auto [i, j] : plan.pairs) {
    if (matrix.penalized(i, j)) continue;
    out.push_back(Commitment{i, j, false});
    committed[i] = 1;
    used[j] = 1;
  }

  const double deadline = ctx.qos.deadline_ms();
  const auto types = pool_types(ctx.instances);
  for (std::size_t i = 0; i < m; ++i) {
    if (committed[i]) continue;
    double fastest = kInf;
    for (int t : types) fastest = std::min(fastest, ctx.predictor.predict(t, ctx.queue[i].batch_size));
    if (matrix.wait_ms(i) + fastest <= deadline) continue;
    // Beyond rescue: serve it as early as possible and take the violation.
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j)
      if (matrix.completion_ms(i, j) < matrix.completion_ms(i, best)) best = j;
    out.push_back(Commitment{i, best, true});
    committed[i] = 1;
    used[best] = 1;
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (committed[i]) continue;
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || !ctx.instances[j].idle() || matrix.penalized(i, j)) continue;
      if (best == n || matrix.cost(i, j) < matrix.cost(i, best)) best = j;
    }
    if (best == n) continue;
    out.push_back(Commitment{i, best, false});
    committed[i] = 1;
    used[best] = 1;
  }
  return out;
}

std::vector<Commitment> ribbon_dispatch(const PolicyContext& ctx) {
  std::vector<std::size_t> idle;
  for (std::size_t j = 0; j < ctx.instances.size(); ++j)
    if (ctx.instances[j].idle()) idle.push_back(j);
  const auto& catalog = ctx.catalog;
  std::sort(idle.begin(), idle.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = ctx.instances[a];
    const auto& y = ctx.instances[b];
    bool xb = catalog[static_cast<std::size_t>(x.type_id)].is_base();
    bool yb = catalog[static_cast<std::size_t>(y.type_id)].is_base();
    return std::tuple(!xb, x.type_id, x.id) < std::tuple(!yb, y.type_id, y.id);
  });

  std::vector<Commitment> out;
  for (std::size_t i = 0; i < ctx.queue.size() && i < idle.size(); ++i) out.push_back(Commitment{i, idle[i], false});
  return out;
}

std::vector<Commitment> drs_dispatch(const PolicyContext& ctx, int threshold) {
  std::vector<std::size_t> base_idle, aux_idle;
  bool has_base = false, has_aux = false;
  for (std::size_t j = 0; j < ctx.instances.size(); ++j) {
    const auto& s = ctx.instances[j];
    bool is_base = ctx.catalog[static_cast<std::size_t>(s.type_id)].is_base();
    (is_base ? has_base : has_aux) = true;
    if (s.idle()) (is_base ? base_idle : aux_idle).push_back(j);
  }
  auto longest_idle_first = [&](std::size_t a, std::size_t b) {
    const auto& x = ctx.instances[a];
    const auto& y = ctx.instances[b];
    return std::tie(x.busy_until, a) < std::tie(y.busy_until, b);
  };
  std::sort(base_idle.begin(), base_idle.end(), longest_idle_first);
  std::sort(aux_idle.begin(), aux_idle.end(), longest_idle_first);

  std::vector<Commitment> out;
  std::size_t next_base = 0, next_aux = 0;
  for (std::size_t i = 0; i < ctx.queue.size(); ++i) {
    bool to_base = ctx.queue[i].batch_size > threshold;
    if (to_base && !has_base) to_base = false;
    if (!to_base && !has_aux) to_base = true;
    if (to_base) {
      if (next_base < base_idle.size()) out.push_back(Commitment{i, base_idle[next_base++], false});
    } else {
      if (next_aux < aux_idle.size()) out.push_back(Commitment{i, aux_idle[next_aux++], false});
    }
    if (next_base == base_idle.size() && next_aux == aux_idle.size()) break;
  }
  return out;
}

std::vector<Commitment> clkwrk_dispatch(const PolicyContext& ctx) {
  const std::size_t n = ctx.instances.size();
  std::vector<Commitment> out;
  if (n == 0) return out;
  std::vector<double> remaining(n);
  for (std::size_t j = 0; j < n; ++j) remaining[j] = ctx.instances[j].busy_remaining_ms(ctx.now);

  const double deadline = ctx.qos.deadline_ms();
  for (std::size_t i = 0; i < ctx.queue.size(); ++i) {
    const auto& q = ctx.queue[i];
    double wait = std::max(0.0, (ctx.now - q.first_queued_time) * 1000.0);
    std::size_t best_ok = n, best_any = n;
    double ok_time = kInf, any_time = kInf, best_pred = 0.0, any_pred = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double pred = ctx.predictor.predict(ctx.instances[j].type_id, q.batch_size);
      double done = remaining[j] + pred;
      if (done < any_time) {
        any_time = done;
        best_any = j;
        any_pred = pred;
      }
      if (wait + done <= deadline && done < ok_time) {
        ok_time = done;
        best_ok = j;
        best_pred = pred;
      }
    }
    bool feasible = best_ok < n;
    std::size_t j = feasible ? best_ok : best_any;
    remaining[j] += feasible ? best_pred : any_pred;
    out.push_back(Commitment{i, j, !feasible});
  }
  return out;
}

std::string policy_names_joined() {
  std::string out;
  for (auto name : kPolicyNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

std::unique_ptr<DispatchPolicy> make_policy(std::string_view name, const PolicyOptions& options) {
  if (name == "kairos") return std::make_unique<KairosPolicy>(options.penalty);
  if (name == "ribbon") return std::make_unique<RibbonPolicy>();
  if (name == "drs") return std::make_unique<DrsPolicy>(options.drs_threshold);
  if (name == "clkwrk") return std::make_unique<ClkwrkPolicy>();
  if (name == "oracle")
    throw ParameterError("'oracle' is an offline reference, not an online dispatch policy");
  throw ParameterError("unknown policy '" + std::string(name) + "'; valid names: " + policy_names_joined());
}

double oracle_throughput(const HeterogeneousConfig& config, const Catalog& catalog,
                         std::span<const int> population, const QoSSpec& qos) {
  validate(config, catalog);
  if (population.empty()) throw ParameterError("oracle_throughput: empty population");

  std::vector<int> sorted(population.begin(), population.end());
  std::sort(sorted.begin(), sorted.end());
  std::ptrdiff_t lo = 0, hi = static_cast<std::ptrdiff_t>(sorted.size()) - 1;

  // (free_at_ms, instance index)
  using Slot = std::pair<double, std::size_t>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free_at;
  std::vector<int> type_of;
  for (std::size_t t = 0; t < catalog.size(); ++t)
    for (int k = 0; k < config.count(t); ++k) {
      free_at.emplace(0.0, type_of.size());
      type_of.push_back(static_cast<int>(t));
    }

  double makespan_ms = 0.0;
  while (lo <= hi && !free_at.empty()) {
    auto [t, j] = free_at.top();
    free_at.pop();
    const auto& type = catalog[static_cast<std::size_t>(type_of[j])];
    int batch;
    if (type.is_base()) {
      batch = sorted[static_cast<std::size_t>(hi--)];
    } else {
      batch = sorted[static_cast<std::size_t>(lo)];
      if (type.mean_latency_ms(batch) > qos.t_qos_ms) continue;  // retires: nothing left it can serve
      ++lo;
    }
    double end = t + type.mean_latency_ms(batch);
    makespan_ms = std::max(makespan_ms, end);
    free_at.emplace(end, j);
  }
  return makespan_ms > 0.0 ? static_cast<double>(sorted.size()) * 1000.0 / makespan_ms : 0.0;
}

ThresholdTuning hill_climb_threshold(const std::function<double(int)>& evaluate, int max_batch, int step,
                                     bool has_auxiliary) {
  ThresholdTuning out;
  if (!has_auxiliary) return out;
  if (step <= 0) throw ParameterError("threshold step must be positive");

  int current = 0;
  double current_qps = evaluate(current);
  out.curve.emplace_back(current, current_qps);
  while (current + step <= max_batch) {
    int next = current + step;
    double next_qps = evaluate(next);
    out.curve.emplace_back(next, next_qps);
    if (!(next_qps > current_qps)) break;
    current = next;
    current_qps = next_qps;
  }
  out.threshold = current;
  out.evaluations = out.curve.size();
  return out;
}

ThresholdTuning drs_tune_threshold(const HeterogeneousConfig& config, const Catalog& catalog,
                                   const WorkloadTemplate& workload, const QoSSpec& qos,
                                   const SimSettings& settings, const TrialParams& params, int step) {
  validate(config, catalog);
  bool has_aux = false;
  for (std::size_t t = 0; t < catalog.size(); ++t)
    if (!catalog[t].is_base() && config.count(t) > 0) has_aux = true;
  auto evaluate = [&](int threshold) {
    DrsPolicy policy(threshold);
    return allowable_throughput(config, catalog, policy, workload, qos, settings, params).qps;
  };
  return hill_climb_threshold(evaluate, workload.max_batch, step, has_aux);
}

}  // namespace hetserve
