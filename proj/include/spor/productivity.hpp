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

// Productivity splits: Invisible holds every training sample with at most N
// units; Visible swaps clusters of Invisible samples for larger ones while
// keeping the total unit count, the unit distribution (within r) and the
// coverage of every unit the long-input test set needs.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spor/core.hpp"
#include "spor/distribution.hpp"

namespace spor {

struct ProductivitySplit {
  size_t threshold = 0;  // N
  double r = kDefaultDivergenceThreshold;
  SplitArtifact invisible;
  SplitArtifact visible;
  SplitArtifact test;
  size_t replacements = 0;
  bool no_candidates = false;  // nothing exceeded N; visible == invisible
};

inline std::vector<Sample> FilterByDomain(const std::vector<Sample>& samples,
                                          const std::optional<std::set<std::string>>& domains) {
  if (!domains) return samples;
  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (s.domain && domains->contains(*s.domain)) out.push_back(s);
  }
  return out;
}

inline size_t TotalUnits(const std::vector<Sample>& samples) {
  size_t n = 0;
  for (const auto& s : samples) n += s.units.size();
  return n;
}

// Builds Invisible and Visible from corpus.train (and the needed-unit guard
// from corpus.test), after applying the optional domain filter to both.
// The seed is recorded for provenance; the construction itself is
// deterministic given the ordering rules (V, then sample id).
inline ProductivitySplit ConstructInvisibleVisible(
    const Corpus& corpus, size_t n_threshold, double r = kDefaultDivergenceThreshold,
    uint64_t seed = 0, const std::optional<std::set<std::string>>& domains = std::nullopt) {
  if (n_threshold < 1) throw Error(ErrorKind::kInvalidParameter, "N must be >= 1");
  const auto train = FilterByDomain(corpus.train, domains);
  const auto test = FilterByDomain(corpus.test, domains);

  ProductivitySplit split;
  split.threshold = n_threshold;
  split.r = r;

  std::vector<Sample> invisible;
  std::vector<const Sample*> candidates;
  for (const auto& s : train) {
    if (s.units.size() <= n_threshold) {
      invisible.push_back(s);
    } else {
      candidates.push_back(&s);
    }
  }

  UnitIndex index;
  std::vector<std::vector<int>> inv_sets, cand_sets;
  for (const auto& s : invisible) inv_sets.push_back(index.InternSample(s));
  for (const auto* s : candidates) cand_sets.push_back(index.InternSample(*s));

  // Units the test set may use: present in Invisible and in a long test sample.
  std::set<int> inv_units;
  for (const auto& set : inv_sets) inv_units.insert(set.begin(), set.end());
  std::vector<bool> needed(index.size(), false);
  for (const auto& s : test) {
    if (s.units.size() <= n_threshold) continue;
    for (const auto& u : s.units) {
      auto id = index.Find(u.id());
      if (id && inv_units.contains(*id)) needed[static_cast<size_t>(*id)] = true;
    }
  }

  const size_t units = index.size();
  std::vector<int64_t> count_inv(units, 0);
  for (const auto& set : inv_sets) {
    for (int u : set) ++count_inv[static_cast<size_t>(u)];
  }
  std::vector<int64_t> count_vis = count_inv;

  auto value_of = [&](const std::vector<int>& set) {
    int64_t v = 0;
    for (int u : set) v += count_inv[static_cast<size_t>(u)] - count_vis[static_cast<size_t>(u)];
    return v;
  };

  std::vector<bool> in_vis(invisible.size(), true);
  std::vector<bool> done(candidates.size(), false);
  std::vector<size_t> committed;
  std::vector<int> removed(units, 0);
  std::vector<bool> in_x(units, false);
  size_t remaining = candidates.size();
  const bool have_dist = TotalUnits(invisible) > 0;

  while (remaining > 0 && have_dist) {
    std::vector<std::pair<int64_t, size_t>> order;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (!done[i]) order.emplace_back(value_of(cand_sets[i]), i);
    }
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return candidates[a.second]->id < candidates[b.second]->id;
    });
    std::vector<std::pair<int64_t, size_t>> members;
    for (size_t j = 0; j < invisible.size(); ++j) {
      if (in_vis[j]) members.emplace_back(value_of(inv_sets[j]), j);
    }
    std::stable_sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return invisible[a.second].id < invisible[b.second].id;
    });

    bool changed = false;
    for (const auto& [unused, ci] : order) {
      done[ci] = true;
      --remaining;
      const auto& xs = cand_sets[ci];
      for (int u : xs) in_x[static_cast<size_t>(u)] = true;

      std::vector<size_t> cluster;
      size_t occupied = 0;  // total units of the cluster
      for (const auto& [v, j] : members) {
        const auto& ys = inv_sets[j];
        if (occupied + ys.size() > xs.size()) continue;
        bool keeps = true;
        for (int u : ys) {
          const auto uu = static_cast<size_t>(u);
          if (!needed[uu]) continue;
          if (count_vis[uu] - removed[uu] - 1 + (in_x[uu] ? 1 : 0) < 1) {
            keeps = false;
            break;
          }
        }
        if (!keeps) continue;
        cluster.push_back(j);
        occupied += ys.size();
        for (int u : ys) ++removed[static_cast<size_t>(u)];
        if (occupied == xs.size()) break;
      }

      bool commit = false;
      if (occupied == xs.size()) {
        std::vector<int64_t> proposal(units, 0);
        for (size_t u = 0; u < units; ++u) {
          proposal[u] = count_vis[u] - removed[u] + (in_x[u] ? 1 : 0);
        }
        commit = ChernoffDivergence(count_inv, proposal) <= r;
      }
      for (size_t j : cluster) {
        for (int u : inv_sets[j]) --removed[static_cast<size_t>(u)];
      }
      for (int u : xs) in_x[static_cast<size_t>(u)] = false;

      if (commit) {
        for (size_t j : cluster) {
          in_vis[j] = false;
          for (int u : inv_sets[j]) --count_vis[static_cast<size_t>(u)];
        }
        for (int u : xs) ++count_vis[static_cast<size_t>(u)];
        committed.push_back(ci);
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }

  std::vector<Sample> visible;
  for (size_t j = 0; j < invisible.size(); ++j) {
    if (in_vis[j]) visible.push_back(invisible[j]);
  }
  for (size_t ci : committed) visible.push_back(*candidates[ci]);

  split.no_candidates = candidates.empty();
  split.replacements = committed.size();
  std::map<std::string, std::string> meta{
      {"N", std::to_string(n_threshold)},
      {"r", std::to_string(r)},
      {"seed", std::to_string(seed)},
      {"replacements", std::to_string(committed.size())},
  };
  if (domains) {
    std::string joined;
    for (const auto& d : *domains) joined += (joined.empty() ? "" : ",") + d;
    meta["domains"] = joined;
  }
  split.invisible = SplitArtifact{Aspect::kProductivity, "invisible", std::move(invisible), meta};
  split.visible = SplitArtifact{Aspect::kProductivity, "visible", std::move(visible), meta};
  return split;
}

// Original test samples with more than N units whose units all occur in both
// training sets.
inline std::vector<Sample> ConstructProductivityTest(
    const std::vector<Sample>& original_test, size_t n_threshold,
    const std::vector<Sample>& invisible, const std::vector<Sample>& visible) {
  const auto inv = UnionOfUnitIds(invisible);
  const auto vis = UnionOfUnitIds(visible);
  std::vector<Sample> out;
  for (const auto& s : original_test) {
    if (s.units.size() <= n_threshold) continue;
    bool ok = true;
    for (const auto& u : s.units) {
      if (!inv.contains(u.id()) || !vis.contains(u.id())) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(s);
  }
  return out;
}

inline ProductivitySplit BuildProductivitySplit(
    const Corpus& corpus, size_t n_threshold, double r = kDefaultDivergenceThreshold,
    uint64_t seed = 0, const std::optional<std::set<std::string>>& domains = std::nullopt) {
  auto split = ConstructInvisibleVisible(corpus, n_threshold, r, seed, domains);
  split.test = SplitArtifact{
      Aspect::kProductivity, "test",
      ConstructProductivityTest(FilterByDomain(corpus.test, domains), n_threshold,
                                split.invisible.samples, split.visible.samples),
      split.invisible.metadata};
  return split;
}

struct ProductivityReport {
  size_t threshold = 0;
  size_t invisible_units = 0;
  size_t visible_units = 0;
  double divergence = 0.0;
  size_t test_samples = 0;
  size_t replacements = 0;
  // Index k holds the number of samples with k units.
  std::vector<size_t> invisible_histogram;
  std::vector<size_t> visible_histogram;
};

inline std::vector<size_t> SizeHistogram(const std::vector<Sample>& samples) {
  std::vector<size_t> h(1, 0);
  for (const auto& s : samples) {
    if (h.size() <= s.units.size()) h.resize(s.units.size() + 1, 0);
    ++h[s.units.size()];
  }
  return h;
}

// Throws kVerificationFailure naming the violated constraint.
inline ProductivityReport VerifyProductivity(const ProductivitySplit& split) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kVerificationFailure, what);
  };
  ProductivityReport rep;
  rep.threshold = split.threshold;
  rep.invisible_units = TotalUnits(split.invisible.samples);
  rep.visible_units = TotalUnits(split.visible.samples);
  rep.test_samples = split.test.samples.size();
  rep.replacements = split.replacements;
  rep.invisible_histogram = SizeHistogram(split.invisible.samples);
  rep.visible_histogram = SizeHistogram(split.visible.samples);

  for (const auto& s : split.invisible.samples) {
    if (s.units.size() > split.threshold) fail("invisible sample " + s.id + " exceeds N");
  }
  if (rep.invisible_units != rep.visible_units) fail("unit totals of Invisible and Visible differ");
  const auto inv = UnionOfUnitIds(split.invisible.samples);
  const auto vis = UnionOfUnitIds(split.visible.samples);
  for (const auto& s : split.test.samples) {
    for (const auto& u : s.units) {
      if (!inv.contains(u.id()) || !vis.contains(u.id())) {
        fail("coverage: test unit " + u.id() + " missing from a training set");
      }
    }
  }
  if (rep.invisible_units > 0) {
    rep.divergence = ChernoffDivergence(ComputeUnitDistribution(split.invisible.samples),
                                        ComputeUnitDistribution(split.visible.samples));
    if (rep.divergence > split.r) fail("divergence above threshold");
  }
  return rep;
}

}  // namespace spor
