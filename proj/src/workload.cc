#include "hetserve/workload.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "hetserve/errors.h"

namespace hetserve {
namespace {

constexpr std::uint64_t kArrivalSalt = 0x61727269766c;  // "arrivl"
constexpr std::uint64_t kBatchSalt = 0x6261746368;      // "batch"

int clamp_round(double x, int max_batch) {
  if (!std::isfinite(x)) return x > 0 ? max_batch : 1;
  double r = std::nearbyint(x);
  if (r < 1.0) return 1;
  if (r > max_batch) return max_batch;
  return static_cast<int>(r);
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

const std::vector<int>& trace_batches(const TraceBatches& t, int max_batch,
                                      std::vector<int>& storage) {
  if (!t.batches.empty()) return t.batches;
  storage = load_trace(t.path, max_batch);
  return storage;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string describe(const BatchDistribution& dist) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LogNormalBatches>) {
          os << "lognormal(mu=" << d.mu << ", sigma=" << d.sigma << ")";
        } else if constexpr (std::is_same_v<T, GaussianBatches>) {
          os << "gaussian(mean=" << d.mean << ", std=" << d.std << ")";
        } else {
          os << "trace(" << d.path.filename().string() << ", " << d.batches.size() << " entries)";
        }
      },
      dist);
  return os.str();
}

void validate(const WorkloadSpec& spec) {
  if (!(spec.rate_qps > 0.0) || !std::isfinite(spec.rate_qps))
    throw ParameterError("rate_qps must be positive");
  if (spec.num_queries < 1) throw ParameterError("num_queries must be at least 1");
  if (spec.max_batch < 1) throw ParameterError("max_batch must be at least 1");
  if (const auto* ln = std::get_if<LogNormalBatches>(&spec.batch_dist)) {
    if (!(ln->sigma > 0.0)) throw ParameterError("lognormal sigma must be positive");
  } else if (const auto* g = std::get_if<GaussianBatches>(&spec.batch_dist)) {
    if (!(g->std > 0.0)) throw ParameterError("gaussian std must be positive");
  } else {
    const auto& t = std::get<TraceBatches>(spec.batch_dist);
    if (t.batches.empty() && t.path.empty()) throw ParameterError("trace distribution has no data");
  }
}

std::vector<int> sample_batches(const WorkloadSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(mix_seed(spec.seed, kBatchSalt));
  std::vector<int> out;
  out.reserve(spec.num_queries);

  if (const auto* ln = std::get_if<LogNormalBatches>(&spec.batch_dist)) {
    std::lognormal_distribution<double> dist(ln->mu, ln->sigma);
    for (std::size_t i = 0; i < spec.num_queries; ++i)
      out.push_back(clamp_round(dist(rng), spec.max_batch));
  } else if (const auto* g = std::get_if<GaussianBatches>(&spec.batch_dist)) {
    std::normal_distribution<double> dist(g->mean, g->std);
    for (std::size_t i = 0; i < spec.num_queries; ++i)
      out.push_back(clamp_round(dist(rng), spec.max_batch));
  } else {
    std::vector<int> storage;
    const auto& trace = trace_batches(std::get<TraceBatches>(spec.batch_dist), spec.max_batch, storage);
    std::uniform_int_distribution<std::size_t> pick(0, trace.size() - 1);
    for (std::size_t i = 0; i < spec.num_queries; ++i)
      out.push_back(std::clamp(trace[pick(rng)], 1, spec.max_batch));
  }
  return out;
}

std::vector<Query> generate_stream(const WorkloadSpec& spec) {
  auto batches = sample_batches(spec);
  std::mt19937_64 rng(mix_seed(spec.seed, kArrivalSalt));
  std::exponential_distribution<double> unit_gap(1.0);

  std::vector<Query> out;
  out.reserve(spec.num_queries);
  double t = 0.0;
  for (std::size_t i = 0; i < spec.num_queries; ++i) {
    t += unit_gap(rng) / spec.rate_qps;
    out.push_back(Query{static_cast<std::int64_t>(i), batches[i], t, t});
  }
  return out;
}

std::vector<int> load_trace(const std::filesystem::path& path, int max_batch) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read trace file '" + path.string() + "'");

  std::vector<int> out;
  std::string line;
  std::size_t lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = trim(line);
    if (lineno == 1 && v.starts_with("\xEF\xBB\xBF")) v = trim(v.substr(3));
    if (v.empty()) continue;
    if (!seen_content && v == "batch_size") {
      seen_content = true;
      continue;
    }
    seen_content = true;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc{} || ptr != v.data() + v.size())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": not an integer: '" +
                        std::string(v) + "'");
    if (value <= 0)
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": batch size must be positive");
    out.push_back(static_cast<int>(std::min<long long>(value, max_batch)));
  }
  if (out.empty()) throw FormatError(path.string() + ": trace contains no batch sizes");
  return out;
}

double empirical_fraction_below(std::span<const int> window, int s) {
  if (window.empty()) throw StateError("empirical_fraction_below: empty window");
  auto below = std::count_if(window.begin(), window.end(), [s](int b) { return b < s; });
  return static_cast<double>(below) / static_cast<double>(window.size());
}

BatchWindow::BatchWindow(std::size_t capacity) : buf_(capacity) {
  if (capacity == 0) throw ParameterError("BatchWindow capacity must be positive");
}

void BatchWindow::push(int batch_size) {
  buf_[next_] = batch_size;
  if (++next_ == buf_.size()) {
    next_ = 0;
    filled_ = true;
  }
}

std::vector<int> BatchWindow::snapshot() const {
  if (!filled_) return {buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(next_)};
  std::vector<int> out(buf_.begin() + static_cast<std::ptrdiff_t>(next_), buf_.end());
  out.insert(out.end(), buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(next_));
  return out;
}

double BatchWindow::fraction_below(int s) const {
  auto snap = snapshot();
  return empirical_fraction_below(snap, s);
}

}  // namespace hetserve
