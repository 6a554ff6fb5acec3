#include "hetserve/config.h"

#include <charconv>
#include <numeric>

#include "hetserve/errors.h"
#include "hetserve/workload.h"

namespace hetserve {

int HeterogeneousConfig::total_instances() const { return std::accumulate(counts.begin(), counts.end(), 0); }

double HeterogeneousConfig::cost_per_hour(const Catalog& catalog) const {
  double total = 0.0;
  for (std::size_t t = 0; t < counts.size() && t < catalog.size(); ++t)
    total += counts[t] * catalog[t].price_per_hour;
  return total;
}

std::uint64_t HeterogeneousConfig::hash() const {
  std::uint64_t h = 0x636f6e666967ULL;
  for (int c : counts) h = mix_seed(h, static_cast<std::uint64_t>(c));
  return h;
}

std::string HeterogeneousConfig::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(counts[i]);
  }
  return out;
}

HeterogeneousConfig parse_config(std::string_view text) {
  HeterogeneousConfig cfg;
  if (text.empty()) throw ParameterError("empty configuration string");
  std::size_t pos = 0;
  while (true) {
    auto comma = text.find(',', pos);
    auto token = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || value < 0)
      throw ParameterError("invalid configuration '" + std::string(text) + "'");
    cfg.counts.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cfg;
}

void validate(const HeterogeneousConfig& config, const Catalog& catalog) {
  if (config.counts.size() != catalog.size())
    throw ParameterError("configuration '" + config.to_string() + "' has " + std::to_string(config.counts.size()) +
                         " entries, catalog has " + std::to_string(catalog.size()) + " types");
  for (int c : config.counts)
    if (c < 0) throw ParameterError("instance counts must be non-negative");
  if (config.count(static_cast<std::size_t>(catalog.base_type())) < 1)
    throw ParameterError("configuration needs at least one base instance");
}

bool is_subconfig(const HeterogeneousConfig& sub, const HeterogeneousConfig& super) {
  if (sub.counts.size() != super.counts.size()) return false;
  bool strict = false;
  for (std::size_t i = 0; i < sub.counts.size(); ++i) {
    if (sub.counts[i] > super.counts[i]) return false;
    if (sub.counts[i] < super.counts[i]) strict = true;
  }
  return strict;
}

}  // namespace hetserve
