// Copyright 2026 The SPOR Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Unit-occurrence distributions and the Chernoff divergence
// D(P, Q) = 1 - sum_k sqrt(p_k * q_k) used by every split builder.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "spor/core.hpp"

namespace spor {

inline constexpr double kDefaultDivergenceThreshold = 0.02;

struct UnitDistribution {
  std::map<std::string, uint64_t> counts;
  uint64_t total = 0;

  double Proportion(const std::string& id) const {
    auto it = counts.find(id);
    if (it == counts.end() || total == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total);
  }
};

// Counts (sample, unit) incidences. With restrict_to, only those ids count.
inline UnitDistribution ComputeUnitDistribution(
    const std::vector<Sample>& samples,
    const std::optional<std::set<std::string>>& restrict_to = std::nullopt) {
  UnitDistribution d;
  for (const auto& s : samples) {
    for (const auto& u : s.units) {
      if (restrict_to && !restrict_to->contains(u.id())) continue;
      ++d.counts[u.id()];
      ++d.total;
    }
  }
  return d;
}

namespace detail {

inline double ClampUnit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace detail

inline double ChernoffDivergence(const UnitDistribution& p, const UnitDistribution& q) {
  if (p.total == 0 || q.total == 0) {
    throw Error(ErrorKind::kDegenerateDistribution, "distribution with zero total");
  }
  const double pt = static_cast<double>(p.total);
  const double qt = static_cast<double>(q.total);
  double coefficient = 0.0;
  // Ids missing from either side contribute sqrt(0) = 0.
  for (const auto& [id, pc] : p.counts) {
    auto it = q.counts.find(id);
    if (it == q.counts.end()) continue;
    coefficient += std::sqrt((static_cast<double>(pc) / pt) *
                             (static_cast<double>(it->second) / qt));
  }
  return detail::ClampUnit(1.0 - coefficient);
}

// Dense form over a shared index space, used inside the builders' inner
// loops. Entries are raw counts; totals are their sums.
inline double ChernoffDivergence(std::span<const int64_t> p, std::span<const int64_t> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kInvalidParameter, "dense distributions differ in length");
  }
  int64_t pt = 0, qt = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    pt += p[i];
    qt += q[i];
  }
  if (pt <= 0 || qt <= 0) {
    throw Error(ErrorKind::kDegenerateDistribution, "distribution with zero total");
  }
  double coefficient = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0 && q[i] > 0) {
      coefficient += std::sqrt((static_cast<double>(p[i]) / static_cast<double>(pt)) *
                               (static_cast<double>(q[i]) / static_cast<double>(qt)));
    }
  }
  return detail::ClampUnit(1.0 - coefficient);
}

}  // namespace spor
