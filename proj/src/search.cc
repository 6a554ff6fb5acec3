#include "hetserve/search.h"

#include <iomanip>
#include <ostream>
#include <random>

#include "hetserve/errors.h"
#include "hetserve/workload.h"

namespace hetserve {
namespace {

void record(SearchTrace& trace, const HeterogeneousConfig& config, double qps, double bound, std::size_t live) {
  trace.steps.push_back(SearchStep{trace.steps.size() + 1, config, qps, bound, live});
  if (trace.steps.size() == 1 || qps > trace.best_qps) {
    trace.best_qps = qps;
    trace.best_config = config;
  }
  trace.evaluations_used = trace.steps.size();
}

}  // namespace

SearchTrace kairos_plus(const UpperBoundTable& table, const Evaluator& evaluate) {
  if (table.empty()) throw ParameterError("kairos_plus: empty upper-bound table");
  const std::size_t n = table.size();
  std::vector<char> live(n, 1);
  std::size_t live_count = n;
  double curr_best = 0.0;

  SearchTrace trace;
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i]) continue;
    const auto& entry = table[i];
    double qps = evaluate(entry.config);
    live[i] = 0;
    --live_count;
    if (qps > entry.qps_max) ++trace.bound_breaches;

    if (qps > curr_best) {
      curr_best = qps;
      for (std::size_t k = 0; k < n; ++k) {
        if (live[k] && table[k].qps_max <= curr_best) {
          live[k] = 0;
          --live_count;
          ++trace.pruned_by_bound;
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (live[k] && is_subconfig(table[k].config, entry.config)) {
        live[k] = 0;
        --live_count;
        ++trace.pruned_as_subconfig;
      }
    }
    record(trace, entry.config, qps, entry.qps_max, live_count);
  }
  return trace;
}

SearchTrace random_search(std::span<const HeterogeneousConfig> configs, const Evaluator& evaluate,
                          std::uint64_t seed, bool with_pruning) {
  if (configs.empty()) throw ParameterError("random_search: empty configuration space");
  std::vector<HeterogeneousConfig> order(configs.begin(), configs.end());
  // Fisher-Yates with an explicit draw so the order does not depend on the standard library.
  std::mt19937_64 rng(mix_seed(seed, 0x72616e64));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  const std::size_t n = order.size();
  std::vector<char> live(n, 1);
  std::size_t live_count = n;
  SearchTrace trace;
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i]) continue;
    double qps = evaluate(order[i]);
    live[i] = 0;
    --live_count;
    if (with_pruning) {
      for (std::size_t k = 0; k < n; ++k) {
        if (live[k] && is_subconfig(order[k], order[i])) {
          live[k] = 0;
          --live_count;
          ++trace.pruned_as_subconfig;
        }
      }
    }
    record(trace, order[i], qps, 0.0, live_count);
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const SearchTrace& trace) {
  out << "iteration,config,qps,live_set_size\n" << std::fixed << std::setprecision(3);
  for (const auto& s : trace.steps)
    out << s.iteration << ",\"" << s.config.to_string() << "\"," << s.qps << ',' << s.live_after << '\n';
  out << std::defaultfloat;
}

}  // namespace hetserve
