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

// Systematicity splits: a test set whose units ("atoms") are all visible in
// training, plus twin training sets Atom (no two atoms co-occur in a sample)
// and Combination (atom combinations visible, same atom coverage, close atom
// distribution).

#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spor/core.hpp"
#include "spor/distribution.hpp"
#include "spor/rng.hpp"

namespace spor {

// Extra acceptance condition on top of the Atom/test construction loop.
//  kStrict:   reject x when any current Atom sample shares a unit with x.
//  kPairSafe: reject x only when accepting it would leave an Atom sample
//             holding two distinct atoms.
//  kNone:     the bare loop; Atom may then contain atoms of two test samples.
enum class AtomicityGuard { kStrict, kPairSafe, kNone };

inline std::string GuardName(AtomicityGuard g) {
  switch (g) {
    case AtomicityGuard::kStrict: return "strict";
    case AtomicityGuard::kPairSafe: return "pair-safe";
    case AtomicityGuard::kNone: return "none";
  }
  return "unknown";
}

inline AtomicityGuard ParseGuard(std::string_view s) {
  if (s == "strict") return AtomicityGuard::kStrict;
  if (s == "pair-safe") return AtomicityGuard::kPairSafe;
  if (s == "none") return AtomicityGuard::kNone;
  throw Error(ErrorKind::kInvalidParameter, "unknown atomicity guard '" + std::string(s) + "'");
}

struct AtomTestResult {
  std::vector<Sample> atom;
  std::vector<Sample> test;
  std::vector<Sample> blocked;
};

// Candidates are drawn uniformly among the remaining samples of maximal size.
// Outputs keep the input order of `train`.
inline AtomTestResult ConstructAtomTest(const std::vector<Sample>& train, uint64_t seed,
                                        AtomicityGuard guard = AtomicityGuard::kStrict) {
  enum class Loc : uint8_t { kPool, kAtom, kTest, kDropped };

  UnitIndex index;
  std::vector<std::vector<int>> sets;
  sets.reserve(train.size());
  for (const auto& s : train) sets.push_back(index.InternSample(s));
  const size_t n = sets.size();

  std::vector<std::vector<size_t>> containing(index.size());
  for (size_t i = 0; i < n; ++i) {
    for (int u : sets[i]) containing[static_cast<size_t>(u)].push_back(i);
  }

  std::vector<Loc> loc(n, Loc::kPool);
  std::vector<bool> blocked(n, false);
  std::vector<bool> is_atom(index.size(), false);
  std::vector<int> atom_sample_count(index.size(), 0);  // Atom samples holding u

  // Pre-shuffled size buckets, largest first: skipping removed entries is
  // equivalent to drawing uniformly among the remaining maximal samples.
  std::map<size_t, std::vector<size_t>, std::greater<>> buckets;
  for (size_t i = 0; i < n; ++i) buckets[sets[i].size()].push_back(i);
  Rng rng(seed);
  for (auto& [size, members] : buckets) rng.Shuffle(members);

  std::vector<int> overlap(n, 0);
  std::vector<size_t> touched;
  std::vector<bool> in_x(index.size(), false);

  for (const auto& [size, members] : buckets) {
    for (size_t x : members) {
      if (loc[x] != Loc::kPool) continue;
      loc[x] = Loc::kDropped;
      const auto& xs = sets[x];

      touched.clear();
      for (int u : xs) {
        in_x[static_cast<size_t>(u)] = true;
        for (size_t y : containing[static_cast<size_t>(u)]) {
          if (y == x) continue;
          if (overlap[y]++ == 0) touched.push_back(y);
        }
      }

      std::vector<size_t> cover;
      std::set<int> covered;
      int max_atom_overlap = 0;
      bool guard_ok = true;
      for (size_t y : touched) {
        const bool live = loc[y] == Loc::kAtom || loc[y] == Loc::kPool;
        if (loc[y] == Loc::kAtom) {
          max_atom_overlap = std::max(max_atom_overlap, overlap[y]);
          if (guard == AtomicityGuard::kStrict) guard_ok = false;
          if (guard == AtomicityGuard::kPairSafe) {
            for (int v : sets[y]) {
              if (is_atom[static_cast<size_t>(v)] && !in_x[static_cast<size_t>(v)]) {
                guard_ok = false;
                break;
              }
            }
          }
        }
        if (live && !blocked[y] && overlap[y] == 1) {
          cover.push_back(y);
          for (int u : sets[y]) {
            if (in_x[static_cast<size_t>(u)]) covered.insert(u);
          }
        }
      }

      const bool accept = covered.size() == xs.size() && max_atom_overlap <= 1 && guard_ok;
      if (accept) {
        loc[x] = Loc::kTest;
        for (int u : xs) is_atom[static_cast<size_t>(u)] = true;
        for (size_t y : cover) {
          if (loc[y] == Loc::kPool) {
            loc[y] = Loc::kAtom;
            for (int u : sets[y]) ++atom_sample_count[static_cast<size_t>(u)];
          }
        }
        for (size_t y : touched) {
          if (loc[y] == Loc::kPool && overlap[y] > 1) blocked[y] = true;
        }
      }

      for (size_t y : touched) overlap[y] = 0;
      for (int u : xs) in_x[static_cast<size_t>(u)] = false;
    }
  }

  AtomTestResult out;
  for (size_t i = 0; i < n; ++i) {
    if (loc[i] == Loc::kAtom) out.atom.push_back(train[i]);
    if (loc[i] == Loc::kTest) out.test.push_back(train[i]);
    if (blocked[i]) out.blocked.push_back(train[i]);
  }
  return out;
}

struct CombinationResult {
  std::vector<Sample> combination;
  size_t replacements = 0;
  double divergence = 0.0;  // atom-restricted, Atom vs final Combination
};

// Replaces clusters of Atom samples by blocked (non-test) samples holding
// atom combinations. A swap keeps atom coverage, requires the cluster's
// distinct-unit count to equal |x|, and keeps the atom-restricted divergence
// to Atom within r. Candidates go in descending V, cluster members in
// ascending V, where V(x) = sum over atoms u in x of (#Atom - #Combination
// samples holding u). Ties break by sample id.
inline CombinationResult ConstructCombination(const std::vector<Sample>& atom,
                                              const std::vector<Sample>& test,
                                              const std::vector<Sample>& blocked,
                                              double r = kDefaultDivergenceThreshold) {
  UnitIndex index;
  std::vector<std::vector<int>> atom_sets, cand_sets;
  for (const auto& s : atom) atom_sets.push_back(index.InternSample(s));

  std::set<std::string> test_ids;
  std::vector<bool> is_atom;
  auto mark_atom = [&](int u) {
    if (is_atom.size() <= static_cast<size_t>(u)) is_atom.resize(static_cast<size_t>(u) + 1, false);
    is_atom[static_cast<size_t>(u)] = true;
  };
  for (const auto& s : test) {
    test_ids.insert(s.id);
    for (int u : index.InternSample(s)) mark_atom(u);
  }
  std::vector<const Sample*> candidates;
  for (const auto& s : blocked) {
    if (test_ids.contains(s.id)) continue;
    candidates.push_back(&s);
    cand_sets.push_back(index.InternSample(s));
  }
  const size_t units = index.size();
  is_atom.resize(units, false);

  std::vector<int64_t> count_atom(units, 0), count_comb(units, 0);
  for (const auto& set : atom_sets) {
    for (int u : set) ++count_atom[static_cast<size_t>(u)];
  }
  count_comb = count_atom;

  auto value_of = [&](const std::vector<int>& set) {
    int64_t v = 0;
    for (int u : set) {
      if (is_atom[static_cast<size_t>(u)]) {
        v += count_atom[static_cast<size_t>(u)] - count_comb[static_cast<size_t>(u)];
      }
    }
    return v;
  };

  std::vector<int64_t> atom_dist(units, 0);
  for (size_t u = 0; u < units; ++u) {
    if (is_atom[u]) atom_dist[u] = count_atom[u];
  }

  std::vector<bool> in_comb(atom.size(), true);  // original Atom members still in C
  std::vector<size_t> committed;                 // candidate indices, commit order
  std::vector<bool> done(candidates.size(), false);

  std::vector<int> removed(units, 0);
  std::vector<int> union_mark(units, 0);
  std::vector<bool> in_x(units, false);

  size_t remaining = candidates.size();
  while (remaining > 0) {
    // Candidate and member orders only move when C changes.
    std::vector<std::pair<int64_t, size_t>> order;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (!done[i]) order.emplace_back(value_of(cand_sets[i]), i);
    }
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return candidates[a.second]->id < candidates[b.second]->id;
    });
    std::vector<std::pair<int64_t, size_t>> members;
    for (size_t j = 0; j < atom.size(); ++j) {
      if (in_comb[j]) members.emplace_back(value_of(atom_sets[j]), j);
    }
    std::stable_sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return atom[a.second].id < atom[b.second].id;
    });

    bool changed = false;
    for (const auto& [unused, ci] : order) {
      done[ci] = true;
      --remaining;
      const auto& xs = cand_sets[ci];
      for (int u : xs) in_x[static_cast<size_t>(u)] = true;

      std::vector<size_t> cluster;
      size_t union_size = 0;
      for (const auto& [v, j] : members) {
        const auto& ys = atom_sets[j];
        size_t fresh = 0;
        for (int u : ys) {
          if (union_mark[static_cast<size_t>(u)] == 0) ++fresh;
        }
        if (union_size + fresh > xs.size()) continue;
        bool covers = true;
        for (int u : ys) {
          const auto uu = static_cast<size_t>(u);
          if (!is_atom[uu]) continue;
          const int64_t left = count_comb[uu] - removed[uu] - 1 + (in_x[uu] ? 1 : 0);
          if (left < 1) {
            covers = false;
            break;
          }
        }
        if (!covers) continue;
        cluster.push_back(j);
        union_size += fresh;
        for (int u : ys) {
          ++union_mark[static_cast<size_t>(u)];
          ++removed[static_cast<size_t>(u)];
        }
      }

      bool commit = false;
      if (union_size == xs.size()) {
        std::vector<int64_t> proposal(units, 0);
        for (size_t u = 0; u < units; ++u) {
          if (is_atom[u]) proposal[u] = count_comb[u] - removed[u] + (in_x[u] ? 1 : 0);
        }
        commit = ChernoffDivergence(atom_dist, proposal) <= r;
      }

      for (size_t j : cluster) {
        for (int u : atom_sets[j]) {
          --union_mark[static_cast<size_t>(u)];
          --removed[static_cast<size_t>(u)];
        }
      }
      for (int u : xs) in_x[static_cast<size_t>(u)] = false;

      if (commit) {
        for (size_t j : cluster) {
          in_comb[j] = false;
          for (int u : atom_sets[j]) --count_comb[static_cast<size_t>(u)];
        }
        for (int u : xs) ++count_comb[static_cast<size_t>(u)];
        committed.push_back(ci);
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }

  CombinationResult out;
  for (size_t j = 0; j < atom.size(); ++j) {
    if (in_comb[j]) out.combination.push_back(atom[j]);
  }
  for (size_t ci : committed) out.combination.push_back(*candidates[ci]);
  out.replacements = committed.size();
  std::vector<int64_t> final_dist(units, 0);
  for (size_t u = 0; u < units; ++u) {
    if (is_atom[u]) final_dist[u] = count_comb[u];
  }
  bool any_atoms = std::any_of(atom_dist.begin(), atom_dist.end(), [](int64_t c) { return c > 0; });
  out.divergence = any_atoms ? ChernoffDivergence(atom_dist, final_dist) : 0.0;
  return out;
}

// Table-1-style statistics for one training set.
struct TrainingSetStats {
  size_t samples = 0;
  size_t unit_occurrences = 0;
  size_t atom_occurrences = 0;
  size_t distinct_atoms = 0;
  size_t distinct_pairs = 0;      // distinct unordered atom pairs co-occurring in a sample
  size_t pair_occurrences = 0;    // (sample, atom pair) incidences
};

inline TrainingSetStats ComputeTrainingSetStats(const std::vector<Sample>& samples,
                                                const std::set<std::string>& atoms) {
  TrainingSetStats st;
  st.samples = samples.size();
  std::set<std::string> seen;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& s : samples) {
    std::vector<std::string> in_sample;
    for (const auto& u : s.units) {
      ++st.unit_occurrences;
      if (atoms.contains(u.id())) {
        ++st.atom_occurrences;
        seen.insert(u.id());
        in_sample.push_back(u.id());
      }
    }
    std::sort(in_sample.begin(), in_sample.end());
    for (size_t i = 0; i < in_sample.size(); ++i) {
      for (size_t j = i + 1; j < in_sample.size(); ++j) {
        pairs.emplace(in_sample[i], in_sample[j]);
        ++st.pair_occurrences;
      }
    }
  }
  st.distinct_atoms = seen.size();
  st.distinct_pairs = pairs.size();
  return st;
}

struct SystematicityReport {
  TrainingSetStats atom;
  TrainingSetStats combination;
  size_t test_samples = 0;
  size_t atoms = 0;
  size_t replacements = 0;
  double divergence = 0.0;
  double threshold = kDefaultDivergenceThreshold;
};

struct SystematicitySplit {
  SplitArtifact atom;
  SplitArtifact combination;
  SplitArtifact test;
  std::vector<Sample> blocked;
  std::set<std::string> atoms;
  size_t pair_count_atom = 0;
  size_t pair_count_combination = 0;
  size_t replacements = 0;
  double threshold = kDefaultDivergenceThreshold;
};

// Throws kVerificationFailure naming the first violated invariant.
inline SystematicityReport VerifySystematicity(const SystematicitySplit& split) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kVerificationFailure, what);
  };
  if (UnionOfUnitIds(split.test.samples) != split.atoms) {
    fail("atoms differ from the union of test units");
  }
  SystematicityReport rep;
  rep.atom = ComputeTrainingSetStats(split.atom.samples, split.atoms);
  rep.combination = ComputeTrainingSetStats(split.combination.samples, split.atoms);
  rep.test_samples = split.test.samples.size();
  rep.atoms = split.atoms.size();
  rep.replacements = split.replacements;
  rep.threshold = split.threshold;

  if (rep.atom.distinct_atoms != split.atoms.size()) fail("atom coverage of Atom");
  if (rep.combination.distinct_atoms != split.atoms.size()) fail("atom coverage of Combination");
  for (const auto& s : split.atom.samples) {
    size_t held = 0;
    for (const auto& u : s.units) held += split.atoms.contains(u.id()) ? 1 : 0;
    if (held >= 2) fail("pair in Atom (sample " + s.id + ")");
  }
  if (split.replacements > 0 && rep.combination.distinct_pairs == 0) {
    fail("no pair in Combination despite committed replacements");
  }
  if (!split.atoms.empty()) {
    const auto p = ComputeUnitDistribution(split.atom.samples, split.atoms);
    const auto q = ComputeUnitDistribution(split.combination.samples, split.atoms);
    rep.divergence = ChernoffDivergence(p, q);
    if (rep.divergence > split.threshold) fail("atom divergence above threshold");
  }
  return rep;
}

struct SystematicityOptions {
  size_t restarts = 20;
  uint64_t seed = 0;
  double r = kDefaultDivergenceThreshold;
  AtomicityGuard guard = AtomicityGuard::kStrict;
};

inline SystematicitySplit AssembleSystematicitySplit(AtomTestResult run, double r) {
  SystematicitySplit split;
  split.threshold = r;
  split.atoms = UnionOfUnitIds(run.test);
  auto comb = ConstructCombination(run.atom, run.test, run.blocked, r);
  split.replacements = comb.replacements;
  split.atom = SplitArtifact{Aspect::kSystematicity, "atom", std::move(run.atom), {}};
  split.combination =
      SplitArtifact{Aspect::kSystematicity, "combination", std::move(comb.combination), {}};
  split.test = SplitArtifact{Aspect::kSystematicity, "test", std::move(run.test), {}};
  split.blocked = std::move(run.blocked);
  split.pair_count_atom = ComputeTrainingSetStats(split.atom.samples, split.atoms).distinct_pairs;
  split.pair_count_combination =
      ComputeTrainingSetStats(split.combination.samples, split.atoms).distinct_pairs;
  return split;
}

// Runs the Atom/test construction under seeds seed+0 .. seed+restarts-1 in
// parallel, keeps the largest test set (lowest restart index on ties), then
// builds Combination for it.
inline SystematicitySplit BestOfRestarts(const Corpus& corpus, const SystematicityOptions& opt) {
  if (opt.restarts < 1) throw Error(ErrorKind::kInvalidParameter, "restarts must be >= 1");
  if (corpus.train.empty()) throw Error(ErrorKind::kEmptyCorpus, "no training samples");

  std::vector<std::future<AtomTestResult>> runs;
  runs.reserve(opt.restarts);
  for (size_t i = 0; i < opt.restarts; ++i) {
    runs.push_back(std::async(std::launch::async, [&corpus, &opt, i] {
      return ConstructAtomTest(corpus.train, opt.seed + i, opt.guard);
    }));
  }
  std::vector<AtomTestResult> results;
  for (auto& f : runs) results.push_back(f.get());

  size_t best = 0;
  std::string sizes;
  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].test.size() > results[best].test.size()) best = i;
    if (i) sizes += ",";
    sizes += std::to_string(results[i].test.size());
  }

  auto split = AssembleSystematicitySplit(std::move(results[best]), opt.r);
  std::map<std::string, std::string> meta{
      {"seed", std::to_string(opt.seed)},
      {"restarts", std::to_string(opt.restarts)},
      {"restart_index", std::to_string(best)},
      {"restart_seed", std::to_string(opt.seed + best)},
      {"r", std::to_string(opt.r)},
      {"guard", GuardName(opt.guard)},
      {"restart_test_sizes", sizes},
      {"replacements", std::to_string(split.replacements)},
  };
  split.atom.metadata = meta;
  split.combination.metadata = meta;
  split.test.metadata = meta;
  return split;
}

}  // namespace spor
