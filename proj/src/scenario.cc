#include "hetserve/scenario.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

#include "hetserve/errors.h"

namespace hetserve {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw FormatError("scenario " + (path.empty() ? std::string("/") : path) + ": " + what);
}

// Checked accessors over one JSON object, with its path for messages.
class Obj {
 public:
  Obj(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail(path_ + "/" + key, "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_ + "/" + key; }

  const json& get(const char* key) const {
    if (!j_.contains(key)) fail(at(key), "missing required key");
    return j_.at(key);
  }

  double number(const char* key) const {
    const auto& v = get(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const auto& v = get(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const char* key) const {
    const auto& v = get(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const char* key, std::string fallback) const { return has(key) ? string(key) : fallback; }

 private:
  const json& j_;
  std::string path_;
};

double positive(const Obj& o, const char* key, double v) {
  if (!(v > 0.0)) fail(o.at(key), "must be positive");
  return v;
}

BatchDistribution parse_batch_dist(const json& j, const std::string& path, const std::filesystem::path& base_dir,
                                   int max_batch) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    fail(path + "/kind", "expected one of lognormal, gaussian, trace");
  auto kind = j.at("kind").get<std::string>();
  if (kind == "lognormal") {
    Obj o(j, path, {"kind", "mu", "sigma"});
    LogNormalBatches d;
    d.mu = o.number("mu", d.mu);
    d.sigma = o.number("sigma", d.sigma);
    if (!(d.sigma > 0)) fail(o.at("sigma"), "must be positive");
    return d;
  }
  if (kind == "gaussian") {
    Obj o(j, path, {"kind", "mean", "std"});
    GaussianBatches d;
    d.mean = o.number("mean", d.mean);
    d.std = o.number("std", d.std);
    if (!(d.std > 0)) fail(o.at("std"), "must be positive");
    return d;
  }
  if (kind == "trace") {
    Obj o(j, path, {"kind", "path"});
    std::filesystem::path p = o.string("path");
    if (p.is_relative()) p = base_dir / p;
    TraceBatches d;
    d.path = p;
    d.batches = load_trace(p, max_batch);
    return d;
  }
  fail(path + "/kind", "expected one of lognormal, gaussian, trace, got '" + kind + "'");
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

static std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = fnv1a(bytes);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError("scenario: invalid JSON at " + line_context(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                      e.what());
  }

  Obj top(root, "", {"name", "description", "seed", "catalog", "qos", "budget_per_hour", "workload", "policy",
                     "trial"});
  Scenario sc;
  sc.name = top.string("name", "unnamed");
  sc.description = top.string("description", "");
  auto seed = top.integer("seed", 1);
  if (seed < 0) fail(top.at("seed"), "must be non-negative");
  sc.seed = static_cast<std::uint64_t>(seed);

  Obj wl(top.get("workload"), "/workload", {"rate_qps", "num_queries", "max_batch", "batch_dist"});
  auto max_batch = wl.integer("max_batch", kDefaultMaxBatch);
  if (max_batch < 1) fail(wl.at("max_batch"), "must be at least 1");

  const auto& cat = top.get("catalog");
  if (!cat.is_array() || cat.empty()) fail("/catalog", "expected a non-empty array of instance types");
  std::vector<InstanceTypeSpec> types;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    Obj t(cat[i], "/catalog/" + std::to_string(i),
          {"name", "price_per_hour", "role", "intercept_ms", "slope_ms_per_request"});
    InstanceTypeSpec spec;
    spec.type_id = static_cast<int>(i);
    spec.name = t.string("name");
    spec.price_per_hour = t.number("price_per_hour");
    auto role = t.string("role");
    if (role == "base")
      spec.role = InstanceRole::kBase;
    else if (role == "auxiliary")
      spec.role = InstanceRole::kAuxiliary;
    else
      fail(t.at("role"), "expected 'base' or 'auxiliary', got '" + role + "'");
    spec.latency_curve = LinearModel{t.number("intercept_ms"), t.number("slope_ms_per_request")};
    types.push_back(std::move(spec));
  }
  try {
    sc.catalog = Catalog(std::move(types), static_cast<int>(max_batch));
  } catch (const std::exception& e) {
    fail("/catalog", e.what());
  }

  Obj q(top.get("qos"), "/qos", {"t_qos_ms", "xi", "percentile"});
  sc.qos.t_qos_ms = q.number("t_qos_ms");
  sc.qos.xi = q.number("xi", sc.qos.xi);
  sc.qos.percentile = q.number("percentile", sc.qos.percentile);
  try {
    validate(sc.qos);
  } catch (const std::exception& e) {
    fail("/qos", e.what());
  }

  sc.budget_per_hour = positive(top, "budget_per_hour", top.number("budget_per_hour"));

  sc.workload.max_batch = static_cast<int>(max_batch);
  sc.workload.rate_qps = positive(wl, "rate_qps", wl.number("rate_qps"));
  auto nq = wl.integer("num_queries", 2000);
  if (nq < 1) fail(wl.at("num_queries"), "must be at least 1");
  sc.workload.num_queries = static_cast<std::size_t>(nq);
  sc.workload.seed = sc.seed;
  try {
    sc.workload.batch_dist = parse_batch_dist(wl.get("batch_dist"), "/workload/batch_dist", base_dir,
                                              sc.workload.max_batch);
  } catch (const IoError& e) {
    fail("/workload/batch_dist/path", e.what());
  } catch (const FormatError& e) {
    if (std::string_view(e.what()).starts_with("scenario ")) throw;
    fail("/workload/batch_dist/path", e.what());
  }

  // The digest covers the trace contents too, so a report pins down its inputs.
  std::uint64_t digest = fnv1a(text);
  if (const auto* trace = std::get_if<TraceBatches>(&sc.workload.batch_dist))
    for (int b : trace->batches) digest = fnv1a(std::to_string(b) + "\n", digest);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest));
  sc.digest = hex;

  if (top.has("policy")) {
    Obj p(top.get("policy"), "/policy", {"drs_threshold", "drs_step", "penalty_multiplier", "controller_overhead_ms"});
    if (p.has("drs_threshold")) {
      auto th = p.integer("drs_threshold");
      if (th < 0 || th > max_batch) fail(p.at("drs_threshold"), "must lie in [0, max_batch]");
      sc.policy.drs_threshold = static_cast<int>(th);
    }
    auto step = p.integer("drs_step", sc.policy.drs_step);
    if (step < 1) fail(p.at("drs_step"), "must be at least 1");
    sc.policy.drs_step = static_cast<int>(step);
    sc.policy.penalty_multiplier = p.number("penalty_multiplier", sc.policy.penalty_multiplier);
    if (sc.policy.penalty_multiplier < 1.0) fail(p.at("penalty_multiplier"), "must be at least 1");
    sc.policy.controller_overhead_ms = p.number("controller_overhead_ms", 0.0);
    if (sc.policy.controller_overhead_ms < 0.0) fail(p.at("controller_overhead_ms"), "must be non-negative");
  }

  if (top.has("trial")) {
    Obj t(top.get("trial"), "/trial", {"trial_queries", "resolution_qps", "latency_noise", "window_size"});
    auto n = t.integer("trial_queries", static_cast<long long>(sc.trial.trial_queries));
    if (n < 1) fail(t.at("trial_queries"), "must be at least 1");
    sc.trial.trial_queries = static_cast<std::size_t>(n);
    sc.trial.resolution_qps = t.number("resolution_qps", sc.trial.resolution_qps);
    if (!(sc.trial.resolution_qps > 0.0)) fail(t.at("resolution_qps"), "must be positive");
    sc.trial.latency_noise = t.number("latency_noise", 0.0);
    if (sc.trial.latency_noise < 0.0) fail(t.at("latency_noise"), "must be non-negative");
    auto w = t.integer("window_size", static_cast<long long>(sc.trial.window_size));
    if (w < 1) fail(t.at("window_size"), "must be at least 1");
    sc.trial.window_size = static_cast<std::size_t>(w);
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

}  // namespace hetserve
