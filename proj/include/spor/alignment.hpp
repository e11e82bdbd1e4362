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

// Locating data units in a text and inducing the unit order it implies.
//
// Triples: each entity is sliced into tokens; every entity token gets the
// text positions at minimal edit distance (admitted when the distance is at
// most min(2, token length)). One position per candidate set is chosen so the
// positions' variance is minimal; all minimizers are kept. Entities then pick
// a representation in ascending order of how many they kept; the number
// standing for an entity (the smallest position of its representation) may
// not lie in another entity's chosen representation, and an entity left
// without an admissible one sits at the boundary. A triple's position is
// that of its lower-degree endpoint in the triple graph, or the larger of the
// two endpoint positions when degrees tie.
//
// Key-value units: strict, case-insensitive token-run matching of the value
// or one of its lexicon surface forms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spor/core.hpp"
#include "spor/text.hpp"

namespace spor {

inline constexpr size_t kCandidateCap = 64;
inline constexpr size_t kMaxRepresentations = 4096;

enum class PositionKind { kFound, kBoundary, kNotFound };

struct Position {
  PositionKind kind = PositionKind::kNotFound;
  int index = -1;

  static Position Found(int i) { return {PositionKind::kFound, i}; }
  static Position Boundary() { return {PositionKind::kBoundary, -1}; }
  static Position NotFound() { return {PositionKind::kNotFound, -1}; }
  bool found() const { return kind == PositionKind::kFound; }
};

struct AlignmentOutcome {
  std::map<std::string, Position> positions;  // entity (triples) or unit id (kv)
  std::optional<std::vector<size_t>> unit_order;  // indices into sample.units
  double boundary_fraction = 0.0;
  size_t boundary_count = 0;
};

// Entity surface tokens, case-folded; underscores separate tokens and
// punctuation-only tokens are dropped.
inline std::vector<std::string> EntityTokens(std::string_view entity) {
  std::vector<std::string> out;
  for (auto& t : Tokenize(UnderscoresToSpaces(entity))) {
    if (!IsPunctToken(t)) out.push_back(FoldCase(t));
  }
  return out;
}

namespace detail {

struct DecodedTokens {
  std::vector<std::u32string> chars;
  explicit DecodedTokens(const std::vector<std::string>& folded) {
    chars.reserve(folded.size());
    for (const auto& t : folded) chars.push_back(DecodeUtf8(t));
  }
};

inline std::vector<std::vector<int>> CandidateSets(const std::vector<std::string>& entity_tokens,
                                                   const DecodedTokens& text) {
  std::vector<std::vector<int>> sets;
  for (const auto& tok : entity_tokens) {
    const auto t = DecodeUtf8(tok);
    const size_t limit = std::min<size_t>(2, t.size());
    size_t best = std::numeric_limits<size_t>::max();
    std::vector<int> positions;
    for (size_t i = 0; i < text.chars.size(); ++i) {
      const auto& w = text.chars[i];
      const size_t lower = w.size() > t.size() ? w.size() - t.size() : t.size() - w.size();
      if (lower > limit || lower > best) continue;
      const size_t d = EditDistance(t, w);
      if (d < best) {
        best = d;
        positions.clear();
      }
      if (d == best) positions.push_back(static_cast<int>(i));
    }
    if (best <= limit && !positions.empty()) sets.push_back(std::move(positions));
  }

  // Oversized sets keep the positions nearest the mean of the others.
  double sum = 0.0;
  size_t count = 0;
  for (const auto& s : sets) {
    if (s.size() > kCandidateCap) continue;
    for (int p : s) sum += p;
    count += s.size();
  }
  if (count == 0) {
    for (const auto& s : sets) {
      for (int p : s) sum += p;
      count += s.size();
    }
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  for (auto& s : sets) {
    if (s.size() <= kCandidateCap) continue;
    std::stable_sort(s.begin(), s.end(), [mean](int a, int b) {
      return std::abs(a - mean) < std::abs(b - mean);
    });
    s.resize(kCandidateCap);
    std::sort(s.begin(), s.end());
  }
  return sets;
}

// Exhaustive search for the selections minimizing the sum of squared
// deviations (equivalently the variance, the count being fixed). The partial
// sum of squares never decreases as points are added, so it bounds the search.
class VarianceSearch {
 public:
  explicit VarianceSearch(const std::vector<std::vector<int>>& sets) : sets_(sets) {
    order_.resize(sets.size());
    for (size_t i = 0; i < sets.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](size_t a, size_t b) { return sets[a].size() < sets[b].size(); });
    choice_.assign(sets.size(), 0);
  }

  std::vector<std::vector<int>> Run() {
    if (sets_.empty()) return {};
    Descend(0, 0, 0);
    std::sort(best_.begin(), best_.end());
    best_.erase(std::unique(best_.begin(), best_.end()), best_.end());
    return best_;
  }

 private:
  // k*Q - S^2 over k, compared exactly by cross-multiplication.
  static bool Greater(int64_t k1, int64_t s1, int64_t q1, int64_t k2, int64_t s2, int64_t q2) {
    return (k1 * q1 - s1 * s1) * k2 > (k2 * q2 - s2 * s2) * k1;
  }

  void Descend(size_t depth, int64_t sum, int64_t sq) {
    const auto k = static_cast<int64_t>(depth);
    if (have_best_ && depth > 0 && Greater(k, sum, sq, n(), best_sum_, best_sq_)) return;
    if (depth == sets_.size()) {
      if (have_best_ && !Greater(n(), best_sum_, best_sq_, n(), sum, sq)) {
        if (best_.size() < kMaxRepresentations) best_.push_back(choice_);
        return;
      }
      have_best_ = true;
      best_sum_ = sum;
      best_sq_ = sq;
      best_.assign(1, choice_);
      return;
    }
    const size_t set = order_[depth];
    std::vector<int> candidates = sets_[set];
    if (depth > 0) {
      const double mean = static_cast<double>(sum) / static_cast<double>(depth);
      std::stable_sort(candidates.begin(), candidates.end(), [mean](int a, int b) {
        return std::abs(a - mean) < std::abs(b - mean);
      });
    }
    for (int p : candidates) {
      choice_[set] = p;
      Descend(depth + 1, sum + p, sq + static_cast<int64_t>(p) * p);
    }
  }

  int64_t n() const { return static_cast<int64_t>(sets_.size()); }

  const std::vector<std::vector<int>>& sets_;
  std::vector<size_t> order_;
  std::vector<int> choice_;
  bool have_best_ = false;
  int64_t best_sum_ = 0;
  int64_t best_sq_ = 0;
  std::vector<std::vector<int>> best_;
};

}  // namespace detail

// Minimum-variance position representations of one entity in a tokenized
// text. Empty when no entity token has an admissible match.
inline std::vector<std::vector<int>> EntityRepresentations(
    std::string_view entity, const std::vector<std::string>& folded_text) {
  detail::DecodedTokens text(folded_text);
  const auto sets = detail::CandidateSets(EntityTokens(entity), text);
  return detail::VarianceSearch(sets).Run();
}

inline std::map<std::string, Position> LocalizeEntitiesInTokens(
    const std::vector<std::string>& entities, const std::vector<std::string>& folded_text) {
  detail::DecodedTokens text(folded_text);
  struct Entry {
    std::string entity;
    std::vector<std::vector<int>> reps;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  for (const auto& e : entities) {
    if (!seen.insert(e).second) continue;
    const auto sets = detail::CandidateSets(EntityTokens(e), text);
    entries.push_back({e, detail::VarianceSearch(sets).Run()});
  }
  // Ties broken by the entity string so the result does not depend on the
  // order in which the entities are listed.
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.reps.size() != b.reps.size()) return a.reps.size() < b.reps.size();
    return a.entity < b.entity;
  });

  // An entity's number (the minimum of its representation) may not occur in
  // another entity's chosen representation, in either direction.
  std::map<std::string, Position> out;
  std::set<int> covered;          // positions of chosen representations
  std::set<int> representatives;  // numbers of placed entities
  for (auto& entry : entries) {
    if (entry.reps.empty()) {
      out[entry.entity] = Position::Boundary();
      continue;
    }
    std::vector<std::vector<int>> sorted_reps = entry.reps;
    for (auto& r : sorted_reps) std::sort(r.begin(), r.end());
    std::sort(sorted_reps.begin(), sorted_reps.end());
    sorted_reps.erase(std::unique(sorted_reps.begin(), sorted_reps.end()), sorted_reps.end());
    bool placed = false;
    for (const auto& r : sorted_reps) {
      if (covered.contains(r.front())) continue;
      if (std::any_of(r.begin(), r.end(), [&](int p) { return representatives.contains(p); })) continue;
      covered.insert(r.begin(), r.end());
      representatives.insert(r.front());
      out[entry.entity] = Position::Found(r.front());
      placed = true;
      break;
    }
    if (!placed) out[entry.entity] = Position::Boundary();
  }
  return out;
}

inline std::map<std::string, Position> LocalizeEntities(const std::vector<std::string>& entities,
                                                        std::string_view text) {
  return LocalizeEntitiesInTokens(entities, FoldTokens(Tokenize(text)));
}

// Distinct subjects and objects in order of first appearance.
inline std::vector<std::string> SampleEntities(const Sample& sample) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& u : sample.units) {
    if (!u.is_triple()) continue;
    for (const auto* e : {&u.subject(), &u.object()}) {
      if (seen.insert(*e).second) out.push_back(*e);
    }
  }
  return out;
}

// Orders the triples at `unit_indices` (all units when empty) by the degree
// rule over the graph those triples form. nullopt when a consulted entity is
// not localized.
inline std::optional<std::vector<size_t>> OrderTriples(
    const Sample& sample, const std::map<std::string, Position>& positions,
    const std::vector<size_t>& unit_indices = {}) {
  std::vector<size_t> idx = unit_indices;
  if (idx.empty()) {
    for (size_t i = 0; i < sample.units.size(); ++i) idx.push_back(i);
  }
  std::map<std::string, int> degree;
  for (size_t i : idx) {
    ++degree[sample.units[i].subject()];
    ++degree[sample.units[i].object()];
  }
  auto pos = [&](const std::string& e) -> std::optional<int> {
    auto it = positions.find(e);
    if (it == positions.end() || !it->second.found()) return std::nullopt;
    return it->second.index;
  };
  std::vector<std::pair<int, size_t>> keyed;
  for (size_t i : idx) {
    const auto& u = sample.units[i];
    const int ds = degree[u.subject()], d_o = degree[u.object()];
    std::optional<int> p;
    if (ds != d_o) {
      p = pos(ds < d_o ? u.subject() : u.object());
    } else {
      auto ps = pos(u.subject()), po = pos(u.object());
      if (ps && po) p = std::max(*ps, *po);
    }
    if (!p) return std::nullopt;
    keyed.emplace_back(*p, i);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<size_t> order;
  for (const auto& [p, i] : keyed) order.push_back(i);
  return order;
}

inline AlignmentOutcome AlignTriples(const Sample& sample, std::string_view text) {
  AlignmentOutcome out;
  out.positions = LocalizeEntities(SampleEntities(sample), text);
  for (const auto& [e, p] : out.positions) out.boundary_count += p.found() ? 0 : 1;
  out.boundary_fraction = out.positions.empty()
                              ? 0.0
                              : static_cast<double>(out.boundary_count) /
                                    static_cast<double>(out.positions.size());
  out.unit_order = OrderTriples(sample, out.positions);
  return out;
}

// Leftmost token-run match of the value or a lexicon form, keyed by unit id.
inline std::map<std::string, Position> LocalizeValues(const Sample& sample, std::string_view text,
                                                      const Lexicon& lexicon = {}) {
  const auto tokens = FoldTokens(Tokenize(text));
  std::map<std::string, Position> out;
  for (const auto& u : sample.units) {
    long best = -1;
    for (const auto& form : lexicon.SurfaceForms(u.attribute(), u.value())) {
      const long at = FindTokenRun(tokens, FoldTokens(Tokenize(form)));
      if (at >= 0 && (best < 0 || at < best)) best = at;
    }
    out[u.id()] = best >= 0 ? Position::Found(static_cast<int>(best)) : Position::NotFound();
  }
  return out;
}

inline std::vector<size_t> OrderByPosition(const Sample& sample,
                                           const std::map<std::string, Position>& positions,
                                           const std::vector<size_t>& indices) {
  std::vector<std::pair<int, size_t>> keyed;
  for (size_t i : indices) keyed.emplace_back(positions.at(sample.units[i].id()).index, i);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<size_t> order;
  for (const auto& [p, i] : keyed) order.push_back(i);
  return order;
}

inline AlignmentOutcome AlignValues(const Sample& sample, std::string_view text,
                                    const Lexicon& lexicon = {}) {
  AlignmentOutcome out;
  out.positions = LocalizeValues(sample, text, lexicon);
  std::vector<size_t> all;
  for (size_t i = 0; i < sample.units.size(); ++i) {
    if (!out.positions.at(sample.units[i].id()).found()) ++out.boundary_count;
    all.push_back(i);
  }
  out.boundary_fraction = sample.units.empty() ? 0.0
                                               : static_cast<double>(out.boundary_count) /
                                                     static_cast<double>(sample.units.size());
  if (out.boundary_count == 0) out.unit_order = OrderByPosition(sample, out.positions, all);
  return out;
}

inline bool IsTripleSample(const Sample& s) { return !s.units.empty() && s.units.front().is_triple(); }

inline AlignmentOutcome Align(const Sample& sample, std::string_view text,
                              const Lexicon& lexicon = {}) {
  return IsTripleSample(sample) ? AlignTriples(sample, text) : AlignValues(sample, text, lexicon);
}

inline std::optional<std::vector<size_t>> ReferenceOrder(const Sample& sample,
                                                         std::string_view reference,
                                                         const Lexicon& lexicon = {}) {
  return Align(sample, reference, lexicon).unit_order;
}

struct OutputUnits {
  std::vector<size_t> present;  // ascending unit indices
  std::vector<size_t> order;    // present units in text order
};

// Detection only: a triple is present when both endpoints localize, a
// key-value unit when its value matches.
inline OutputUnits ExtractOutputUnits(const Sample& sample, std::string_view output,
                                      const Lexicon& lexicon = {}) {
  OutputUnits out;
  if (IsTripleSample(sample)) {
    const auto positions = LocalizeEntities(SampleEntities(sample), output);
    auto found = [&](const std::string& e) {
      auto it = positions.find(e);
      return it != positions.end() && it->second.found();
    };
    for (size_t i = 0; i < sample.units.size(); ++i) {
      const auto& u = sample.units[i];
      if (found(u.subject()) && found(u.object())) out.present.push_back(i);
    }
    if (!out.present.empty()) {
      auto order = OrderTriples(sample, positions, out.present);
      if (order) out.order = *order;
    }
  } else {
    const auto positions = LocalizeValues(sample, output, lexicon);
    for (size_t i = 0; i < sample.units.size(); ++i) {
      if (positions.at(sample.units[i].id()).found()) out.present.push_back(i);
    }
    out.order = OrderByPosition(sample, positions, out.present);
  }
  return out;
}

}  // namespace spor
