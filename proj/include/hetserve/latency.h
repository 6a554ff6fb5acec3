#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hetserve/workload.h"

namespace hetserve {

enum class InstanceRole { kBase, kAuxiliary };

struct LinearModel {
  double intercept_ms = 0.0;
  double slope_ms_per_request = 0.0;

  double operator()(int batch) const { return intercept_ms + slope_ms_per_request * batch; }
};

// A purchasable hardware class with its ground-truth affine latency curve.
struct InstanceTypeSpec {
  int type_id = 0;
  std::string name;
  double price_per_hour = 0.0;
  LinearModel latency_curve;
  InstanceRole role = InstanceRole::kAuxiliary;

  bool is_base() const { return role == InstanceRole::kBase; }
  double mean_latency_ms(int batch) const { return latency_curve(batch); }
};

// Ordered set of instance types; type_id equals the position in the catalog.
class Catalog {
 public:
  Catalog() = default;
  // Validates: ids are 0..n-1 in order, exactly one base, positive prices,
  // latency positive over [1, max_batch]. Throws ConfigurationError.
  explicit Catalog(std::vector<InstanceTypeSpec> types, int max_batch = kDefaultMaxBatch);

  std::span<const InstanceTypeSpec> types() const { return types_; }
  const InstanceTypeSpec& operator[](std::size_t i) const { return types_[i]; }
  std::size_t size() const { return types_.size(); }
  int base_type() const { return base_; }
  int max_batch() const { return max_batch_; }

 private:
  std::vector<InstanceTypeSpec> types_;
  int base_ = -1;
  int max_batch_ = kDefaultMaxBatch;
};

struct QoSSpec {
  double t_qos_ms = 100.0;
  double xi = 0.98;
  double percentile = 99.0;

  double deadline_ms() const { return xi * t_qos_ms; }
};

void validate(const QoSSpec& qos);

struct LatencyNoise {
  double std_fraction = 0.05;
};

// Service latency of one query: the affine curve plus optional zero-mean Gaussian noise
// with std = std_fraction * mean, floored at 0.01 ms.
double true_latency(const InstanceTypeSpec& type, int batch, std::optional<LatencyNoise> noise,
                    std::mt19937_64& rng, int max_batch = kDefaultMaxBatch);

// Online latency model: per-type lookup table of running means, backed by a
// least-squares line once two distinct batch sizes have been seen, or a prior.
class LatencyPredictor {
 public:
  explicit LatencyPredictor(std::size_t num_types = 0, int max_batch = kDefaultMaxBatch);

  void set_prior(int type_id, LinearModel prior);
  void observe(int type_id, int batch, double measured_ms);
  double predict(int type_id, int batch) const;

  // Least-squares line over all observations; nullopt with < 2 distinct batch sizes.
  std::optional<LinearModel> fit(int type_id) const;
  std::optional<double> table_value(int type_id, int batch) const;
  std::size_t observations(int type_id) const;
  std::size_t num_types() const { return types_.size(); }

 private:
  struct Cell {
    double sum = 0.0;
    std::uint32_t count = 0;
  };
  struct PerType {
    std::vector<Cell> table;
    std::optional<LinearModel> prior;
    std::size_t n = 0;
    std::size_t distinct = 0;
    int single_batch = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
  };
  const PerType& at(int type_id) const;

  std::vector<PerType> types_;
  int max_batch_;
};

// C_base = 1; C_j = latency_base(max_batch) / latency_j(max_batch), clamped to (0, 1].
std::vector<double> heterogeneity_coefficients(std::span<const InstanceTypeSpec> pool_types,
                                               int max_batch = kDefaultMaxBatch);
std::vector<double> heterogeneity_coefficients(const Catalog& catalog);

// Largest batch in [1, max_batch] whose mean latency fits xi * t_qos; 0 if none.
int qos_batch_limit(const InstanceTypeSpec& type, const QoSSpec& qos, int max_batch = kDefaultMaxBatch);

}  // namespace hetserve
