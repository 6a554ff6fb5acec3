#include "hetserve/capacity.h"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "hetserve/errors.h"
#include "hetserve/workload.h"

namespace hetserve {
namespace {

constexpr double kBudgetEps = 1e-9;

// 1000 / mean latency over the batches selected by `keep`; 0 for an empty selection.
template <typename Pred>
double service_rate(const InstanceTypeSpec& type, std::span<const int> window, Pred keep) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int b : window) {
    if (!keep(b)) continue;
    sum += type.mean_latency_ms(b);
    ++n;
  }
  return n == 0 || sum <= 0.0 ? 0.0 : 1000.0 * static_cast<double>(n) / sum;
}

}  // namespace

RateProfile rate_profile(const Catalog& catalog, const QoSSpec& qos, std::span<const int> window) {
  if (window.empty()) throw StateError("rate_profile: empty batch window");
  const int mb = catalog.max_batch();
  RateProfile p;
  p.base_type = catalog.base_type();
  p.s.assign(catalog.size(), 0);
  p.f.assign(catalog.size(), 0.0);
  p.q_aux.assign(catalog.size(), 0.0);

  const auto& base = catalog[static_cast<std::size_t>(p.base_type)];
  if (qos_batch_limit(base, qos, mb) < mb)
    throw ConfigurationError("base type '" + base.name + "' cannot serve the largest batch within the QoS target");

  bool any_aux = false;
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (catalog[t].is_base()) {
      p.s[t] = mb;
      p.f[t] = 1.0;
      continue;
    }
    p.s[t] = qos_batch_limit(catalog[t], qos, mb);
    p.f[t] = empirical_fraction_below(window, p.s[t]);
    if (!any_aux || p.f[t] > p.f_prime) {
      p.f_prime = p.f[t];
      p.s_prime = p.s[t];
    }
    any_aux = true;
  }

  const int s_prime = p.s_prime;
  p.q_base = service_rate(base, window, [](int) { return true; });
  p.q_base_splus = service_rate(base, window, [s_prime](int b) { return b >= s_prime; });
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (catalog[t].is_base() || p.s[t] == 0) continue;
    p.q_aux[t] = service_rate(catalog[t], window, [s_prime](int b) { return b < s_prime; });
  }
  return p;
}

double upper_bound(const HeterogeneousConfig& config, const RateProfile& profile) {
  const auto base = static_cast<std::size_t>(profile.base_type);
  const double u = config.count(base);
  if (u < 1) throw ParameterError("upper_bound: configuration needs at least one base instance");

  double aux_rate = 0.0;
  for (std::size_t t = 0; t < profile.q_aux.size(); ++t)
    if (t != base) aux_rate += config.count(t) * profile.q_aux[t];

  const double f = profile.f_prime;
  const double base_all = u * profile.q_base;
  if (f <= 0.0) return base_all;
  if (f >= 1.0) return aux_rate + base_all;

  const double base_large = u * profile.q_base_splus;
  const double offload = aux_rate * (1.0 - f) / f;
  if (base_large <= offload) return base_large / (1.0 - f);
  return aux_rate / f + (base_large - offload) / base_large * base_all;
}

std::vector<HeterogeneousConfig> enumerate_configs(const Catalog& catalog, double budget_per_hour) {
  const auto base = static_cast<std::size_t>(catalog.base_type());
  if (budget_per_hour + kBudgetEps < catalog[base].price_per_hour)
    throw ConfigurationError("budget " + std::to_string(budget_per_hour) + " $/hr is below the base instance price");

  std::vector<HeterogeneousConfig> out;
  HeterogeneousConfig cur{std::vector<int>(catalog.size(), 0)};
  auto recurse = [&](auto&& self, std::size_t t, double spent) -> void {
    if (t == catalog.size()) {
      out.push_back(cur);
      return;
    }
    const double price = catalog[t].price_per_hour;
    for (int c = (t == base ? 1 : 0);; ++c) {
      double cost = spent + c * price;
      if (cost > budget_per_hour + kBudgetEps) break;
      cur.counts[t] = c;
      self(self, t + 1, cost);
    }
    cur.counts[t] = 0;
  };
  recurse(recurse, 0, 0.0);
  return out;
}

UpperBoundTable rank_configs(std::span<const HeterogeneousConfig> configs, const RateProfile& profile,
                             const Catalog& catalog) {
  UpperBoundTable table;
  table.reserve(configs.size());
  for (const auto& c : configs) table.push_back({c, upper_bound(c, profile), c.cost_per_hour(catalog)});
  std::stable_sort(table.begin(), table.end(), [](const UpperBoundEntry& a, const UpperBoundEntry& b) {
    if (a.qps_max != b.qps_max) return a.qps_max > b.qps_max;
    return a.config < b.config;
  });
  return table;
}

const char* to_string(ChoiceRule rule) {
  switch (rule) {
    case ChoiceRule::kHomogeneous:
      return "homogeneous";
    case ChoiceRule::kTopAgreement:
      return "top_agreement";
    case ChoiceRule::kMinSse:
      break;
  }
  return "min_sse";
}

ConfigChoice choose_config(const UpperBoundTable& table, int base_type, std::size_t agree_k, std::size_t sse_k) {
  if (table.empty()) throw ParameterError("choose_config: empty upper-bound table");
  const auto base = static_cast<std::size_t>(base_type);

  bool any_aux = false;
  for (const auto& e : table)
    for (std::size_t t = 0; t < e.config.counts.size(); ++t)
      if (t != base && e.config.counts[t] > 0) any_aux = true;
  if (!any_aux) return {table[0].config, table[0].qps_max, ChoiceRule::kHomogeneous, 1};

  const std::size_t top = std::min(agree_k, table.size());
  bool agree = true;
  for (std::size_t k = 1; k < top; ++k)
    if (table[k].config.count(base) != table[0].config.count(base)) agree = false;
  if (agree) return {table[0].config, table[0].qps_max, ChoiceRule::kTopAgreement, top};

  const std::size_t n = std::min(sse_k, table.size());
  std::size_t best = 0;
  double best_sse = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double sse = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& x = table[a].config.counts;
      const auto& y = table[b].config.counts;
      for (std::size_t t = 0; t < x.size(); ++t) {
        double d = static_cast<double>(x[t]) - (t < y.size() ? y[t] : 0);
        sse += d * d;
      }
    }
    bool better = a == 0 || sse < best_sse ||
                  (sse == best_sse && (table[a].qps_max > table[best].qps_max ||
                                       (table[a].qps_max == table[best].qps_max && table[a].config < table[best].config)));
    if (better) {
      best = a;
      best_sse = sse;
    }
  }
  return {table[best].config, table[best].qps_max, ChoiceRule::kMinSse, n};
}

void write_upper_bound_csv(std::ostream& out, const UpperBoundTable& table, const Catalog& catalog) {
  for (const auto& t : catalog.types()) out << t.name << ',';
  out << "cost_per_hour,qps_max\n";
  out << std::fixed;
  for (const auto& e : table) {
    for (std::size_t t = 0; t < catalog.size(); ++t) out << e.config.count(t) << ',';
    out << std::setprecision(4) << e.cost_per_hour << ',' << std::setprecision(6) << e.qps_max << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace hetserve
