#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hetserve {

inline constexpr int kDefaultMaxBatch = 1000;
inline constexpr std::size_t kDefaultWindowSize = 10000;

// One batched inference request. Times are simulation seconds.
struct Query {
  std::int64_t id = 0;
  int batch_size = 1;
  double arrival_time = 0.0;
  double first_queued_time = 0.0;
};

struct LogNormalBatches {
  double mu = 4.6;
  double sigma = 0.9;
};

struct GaussianBatches {
  double mean = 200.0;
  double std = 50.0;
};

// Empirical distribution: batch sizes are resampled uniformly from the trace.
struct TraceBatches {
  std::filesystem::path path;
  std::vector<int> batches;  // filled by load_trace; loaded lazily when empty
};

using BatchDistribution = std::variant<LogNormalBatches, GaussianBatches, TraceBatches>;

std::string describe(const BatchDistribution& dist);

struct WorkloadSpec {
  double rate_qps = 100.0;
  BatchDistribution batch_dist = LogNormalBatches{};
  std::size_t num_queries = 1000;
  std::uint64_t seed = 1;
  int max_batch = kDefaultMaxBatch;
};

// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Throws ParameterError when the workload cannot be generated.
void validate(const WorkloadSpec& spec);

// Poisson arrivals (i.i.d. exponential gaps) with batch sizes drawn from the workload's
// distribution. Arrival gaps and batch sizes come from separate seeded streams, so
// changing rate_qps rescales the arrival times without touching the batch sequence.
std::vector<Query> generate_stream(const WorkloadSpec& spec);

// Batch sizes only (same batch stream generate_stream would produce).
std::vector<int> sample_batches(const WorkloadSpec& spec);

// One integer per line, optional "batch_size" header. Entries above max_batch are clamped.
std::vector<int> load_trace(const std::filesystem::path& path, int max_batch = kDefaultMaxBatch);

// |{b in window : b < s}| / |window|
double empirical_fraction_below(std::span<const int> window, int s);

// Fixed-capacity ring buffer holding the most recent batch sizes.
class BatchWindow {
 public:
  explicit BatchWindow(std::size_t capacity = kDefaultWindowSize);

  void push(int batch_size);
  std::size_t size() const { return filled_ ? buf_.size() : next_; }
  std::size_t capacity() const { return buf_.size(); }
  bool empty() const { return size() == 0; }
  // Oldest first.
  std::vector<int> snapshot() const;
  double fraction_below(int s) const;

 private:
  std::vector<int> buf_;
  std::size_t next_ = 0;
  bool filled_ = false;
};

}  // namespace hetserve
