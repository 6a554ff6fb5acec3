#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hetserve/latency.h"

namespace hetserve {

// Instance counts per catalog type (u for the base type, v^i for auxiliaries).
struct HeterogeneousConfig {
  std::vector<int> counts;

  int count(std::size_t type_id) const { return type_id < counts.size() ? counts[type_id] : 0; }
  int total_instances() const;
  double cost_per_hour(const Catalog& catalog) const;
  std::uint64_t hash() const;
  std::string to_string() const;  // "3,1,3"

  auto operator<=>(const HeterogeneousConfig&) const = default;
};

// Parses "3,1,3". Throws ParameterError on malformed input.
HeterogeneousConfig parse_config(std::string_view text);

// Checks size against the catalog, non-negative counts and at least one base instance.
void validate(const HeterogeneousConfig& config, const Catalog& catalog);

// sub <= super component-wise with at least one strict inequality.
bool is_subconfig(const HeterogeneousConfig& sub, const HeterogeneousConfig& super);

}  // namespace hetserve
