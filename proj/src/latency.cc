#include "hetserve/latency.h"

#include <algorithm>
#include <cmath>

#include "hetserve/errors.h"

namespace hetserve {

Catalog::Catalog(std::vector<InstanceTypeSpec> types, int max_batch)
    : types_(std::move(types)), max_batch_(max_batch) {
  if (types_.empty()) throw ConfigurationError("catalog is empty");
  if (max_batch_ < 1) throw ConfigurationError("max_batch must be at least 1");
  for (std::size_t i = 0; i < types_.size(); ++i) {
    const auto& t = types_[i];
    if (t.type_id != static_cast<int>(i))
      throw ConfigurationError("type '" + t.name + "': type_id must equal its catalog position");
    if (!(t.price_per_hour > 0.0)) throw ConfigurationError("type '" + t.name + "': price must be positive");
    if (t.latency_curve.intercept_ms < 0.0)
      throw ConfigurationError("type '" + t.name + "': latency intercept must be >= 0");
    if (!(t.latency_curve.slope_ms_per_request > 0.0))
      throw ConfigurationError("type '" + t.name + "': latency slope must be positive");
    if (t.is_base()) {
      if (base_ >= 0) throw ConfigurationError("catalog has more than one base type");
      base_ = static_cast<int>(i);
    }
  }
  if (base_ < 0) throw ConfigurationError("catalog has no base type");
}

void validate(const QoSSpec& qos) {
  if (!(qos.t_qos_ms > 0.0)) throw ParameterError("t_qos_ms must be positive");
  if (!(qos.xi > 0.0 && qos.xi <= 1.0)) throw ParameterError("xi must lie in (0, 1]");
  if (!(qos.percentile > 0.0 && qos.percentile <= 100.0))
    throw ParameterError("percentile must lie in (0, 100]");
}

double true_latency(const InstanceTypeSpec& type, int batch, std::optional<LatencyNoise> noise,
                    std::mt19937_64& rng, int max_batch) {
  if (batch < 1 || batch > max_batch)
    throw ParameterError("batch " + std::to_string(batch) + " outside [1, " + std::to_string(max_batch) + "]");
  double mean = type.latency_curve(batch);
  double value = mean;
  if (noise && noise->std_fraction > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise->std_fraction * mean);
    value += gauss(rng);
  }
  return std::max(value, 0.01);
}

LatencyPredictor::LatencyPredictor(std::size_t num_types, int max_batch)
    : types_(num_types), max_batch_(max_batch) {
  for (auto& t : types_) t.table.resize(static_cast<std::size_t>(max_batch) + 1);
}

const LatencyPredictor::PerType& LatencyPredictor::at(int type_id) const {
  if (type_id < 0 || static_cast<std::size_t>(type_id) >= types_.size())
    throw ParameterError("unknown type_id " + std::to_string(type_id));
  return types_[static_cast<std::size_t>(type_id)];
}

void LatencyPredictor::set_prior(int type_id, LinearModel prior) {
  at(type_id);
  types_[static_cast<std::size_t>(type_id)].prior = prior;
}

void LatencyPredictor::observe(int type_id, int batch, double measured_ms) {
  at(type_id);
  if (batch < 1 || batch > max_batch_) throw ParameterError("observed batch out of range");
  auto& t = types_[static_cast<std::size_t>(type_id)];
  auto& cell = t.table[static_cast<std::size_t>(batch)];
  if (cell.count == 0) {
    if (t.distinct == 0) t.single_batch = batch;
    ++t.distinct;
  }
  cell.sum += measured_ms;
  ++cell.count;

  double x = batch;
  ++t.n;
  t.sx += x;
  t.sy += measured_ms;
  t.sxx += x * x;
  t.sxy += x * measured_ms;
}

std::optional<LinearModel> LatencyPredictor::fit(int type_id) const {
  const auto& t = at(type_id);
  if (t.distinct < 2) return std::nullopt;
  double n = static_cast<double>(t.n);
  double denom = n * t.sxx - t.sx * t.sx;
  if (denom <= 0.0) return std::nullopt;
  double slope = (n * t.sxy - t.sx * t.sy) / denom;
  double intercept = (t.sy - slope * t.sx) / n;
  return LinearModel{intercept, slope};
}

std::optional<double> LatencyPredictor::table_value(int type_id, int batch) const {
  const auto& t = at(type_id);
  if (batch < 1 || batch > max_batch_) return std::nullopt;
  const auto& cell = t.table[static_cast<std::size_t>(batch)];
  if (cell.count == 0) return std::nullopt;
  return cell.sum / cell.count;
}

std::size_t LatencyPredictor::observations(int type_id) const { return at(type_id).n; }

double LatencyPredictor::predict(int type_id, int batch) const {
  const auto& t = at(type_id);
  if (batch >= 1 && batch <= max_batch_) {
    const auto& cell = t.table[static_cast<std::size_t>(batch)];
    if (cell.count > 0) return cell.sum / cell.count;
  }
  if (auto line = fit(type_id)) return std::max(0.0, (*line)(batch));
  if (t.prior) return std::max(0.0, (*t.prior)(batch));
  if (t.distinct == 1) {
    // Only one batch size seen: scale its mean proportionally.
    const auto& cell = t.table[static_cast<std::size_t>(t.single_batch)];
    return cell.sum / cell.count * batch / t.single_batch;
  }
  throw StateError("no latency observations or prior for type " + std::to_string(type_id));
}

std::vector<double> heterogeneity_coefficients(std::span<const InstanceTypeSpec> pool_types,
                                               int max_batch) {
  const InstanceTypeSpec* base = nullptr;
  for (const auto& t : pool_types) {
    if (!t.is_base()) continue;
    if (base) throw ConfigurationError("pool has more than one base type");
    base = &t;
  }
  if (!base) throw ConfigurationError("pool has no base type");
  double base_latency = base->mean_latency_ms(max_batch);
  std::vector<double> out;
  out.reserve(pool_types.size());
  for (const auto& t : pool_types) {
    double lat = t.mean_latency_ms(max_batch);
    if (!(lat > 0.0) || !(base_latency > 0.0))
      throw ConfigurationError("latency at max batch must be positive");
    out.push_back(t.is_base() ? 1.0 : std::min(1.0, base_latency / lat));
  }
  return out;
}

std::vector<double> heterogeneity_coefficients(const Catalog& catalog) {
  return heterogeneity_coefficients(catalog.types(), catalog.max_batch());
}

int qos_batch_limit(const InstanceTypeSpec& type, const QoSSpec& qos, int max_batch) {
  const double deadline = qos.deadline_ms();
  const auto& c = type.latency_curve;
  if (c(1) > deadline) return 0;
  if (c(max_batch) <= deadline) return max_batch;
  // Closed form, then nudge to absorb rounding at the boundary.
  int b = static_cast<int>(std::floor((deadline - c.intercept_ms) / c.slope_ms_per_request));
  b = std::clamp(b, 1, max_batch);
  while (b < max_batch && c(b + 1) <= deadline) ++b;
  while (b > 1 && c(b) > deadline) --b;
  return b;
}

}  // namespace hetserve
