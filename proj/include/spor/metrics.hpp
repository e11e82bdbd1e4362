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

// Rank correlation, the PARENT performance metric, paired significance and
// multi-seed averaging.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spor/core.hpp"
#include "spor/rng.hpp"
#include "spor/text.hpp"

namespace spor {

// (concordant - discordant) / (n(n-1)/2) for two tie-free rankings of the
// same items.
template <typename Item>
double KendallTau(const std::vector<Item>& order_a, const std::vector<Item>& order_b) {
  const size_t n = order_a.size();
  if (n != order_b.size()) throw Error(ErrorKind::kItemMismatch, "orders differ in length");
  std::map<Item, size_t> rank_b;
  for (size_t i = 0; i < n; ++i) {
    if (!rank_b.emplace(order_b[i], i).second) {
      throw Error(ErrorKind::kItemMismatch, "repeated item in ranking");
    }
  }
  std::vector<size_t> mapped;
  mapped.reserve(n);
  std::set<Item> seen;
  for (const auto& item : order_a) {
    auto it = rank_b.find(item);
    if (it == rank_b.end() || !seen.insert(item).second) {
      throw Error(ErrorKind::kItemMismatch, "rankings cover different items");
    }
    mapped.push_back(it->second);
  }
  if (n < 2) throw Error(ErrorKind::kTooFewItems, "need at least two items");
  int64_t concordant = 0, discordant = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (mapped[i] < mapped[j]) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

// --- PARENT (word-overlap entailment) -------------------------------------

struct ParentParams {
  int max_order = 4;
  double lambda = 0.5;
  double smoothing = 1e-5;
  double mention_smoothing = 1e-6;
};

namespace detail {

using Ngram = std::vector<std::string>;

inline std::map<Ngram, int> NgramCounts(const std::vector<std::string>& tokens, int order) {
  std::map<Ngram, int> out;
  const auto n = static_cast<size_t>(order);
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[Ngram(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n))];
  }
  return out;
}

inline size_t LcsLength(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::vector<std::string> ScoringTokens(std::string_view text) {
  return FoldTokens(Tokenize(UnderscoresToSpaces(text)));
}

}  // namespace detail

// Table entries as token lists: head + tail for triples, the value for
// key-value units (the E2E name included when present).
inline std::vector<std::vector<std::string>> TableEntries(const std::vector<DataUnit>& units,
                                                          const std::optional<DataUnit>& name = std::nullopt) {
  std::vector<std::vector<std::string>> out;
  if (name) out.push_back(detail::ScoringTokens(name->value()));
  for (const auto& u : units) {
    if (u.is_triple()) {
      auto head = detail::ScoringTokens(u.subject());
      const auto tail = detail::ScoringTokens(u.object());
      head.insert(head.end(), tail.begin(), tail.end());
      out.push_back(std::move(head));
    } else {
      out.push_back(detail::ScoringTokens(u.value()));
    }
  }
  return out;
}

namespace detail {

struct ParentParts {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline ParentParts ParentAgainst(const std::vector<std::string>& pred,
                                 const std::vector<std::string>& ref,
                                 const std::vector<std::vector<std::string>>& table,
                                 const std::set<std::string>& table_tokens,
                                 const ParentParams& params) {
  auto entail = [&](const Ngram& g) {
    size_t overlap = 0;
    for (const auto& t : g) overlap += table_tokens.contains(t) ? 1 : 0;
    return static_cast<double>(overlap) / static_cast<double>(g.size());
  };

  std::vector<double> precisions, ref_recalls;
  for (int order = 1; order <= params.max_order; ++order) {
    const auto pc = NgramCounts(pred, order);
    const auto rc = NgramCounts(ref, order);

    double num = 0.0, den = 0.0;
    for (const auto& [g, c] : pc) {
      den += c;
      auto it = rc.find(g);
      const double in_ref = std::min(1.0, (it == rc.end() ? 0.0 : it->second) / static_cast<double>(c));
      num += c * (in_ref + (1.0 - in_ref) * entail(g));
    }
    precisions.push_back(den == 0.0 ? 0.0 : num / den);

    num = 0.0;
    den = 0.0;
    for (const auto& [g, c] : rc) {
      auto it = pc.find(g);
      const double in_pred = std::min(1.0, (it == pc.end() ? 0.0 : it->second) / static_cast<double>(c));
      const double w = entail(g);
      den += c * w;
      num += c * w * in_pred;
    }
    ref_recalls.push_back(den == 0.0 ? 1.0 : num / den);
  }

  double table_recall = 0.0;
  for (const auto& entry : table) {
    table_recall += (static_cast<double>(LcsLength(entry, pred)) + params.mention_smoothing) /
                    (static_cast<double>(entry.size()) + params.mention_smoothing);
  }
  table_recall /= static_cast<double>(table.size());

  for (size_t i = 1; i < precisions.size(); ++i) {
    if (precisions[i] == 0.0) precisions[i] = params.smoothing;
    if (ref_recalls[i] == 0.0) ref_recalls[i] = params.smoothing;
  }
  auto geo_mean = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
      if (x == 0.0) return 0.0;
      s += std::log(x) / static_cast<double>(v.size());
    }
    return std::exp(s);
  };
  ParentParts parts;
  parts.precision = geo_mean(precisions);
  double ref_recall = geo_mean(ref_recalls);
  if (table_recall == 0.0) table_recall = params.smoothing;
  parts.recall = ref_recall == 0.0
                     ? 0.0
                     : std::exp((1.0 - params.lambda) * std::log(ref_recall) +
                                params.lambda * std::log(table_recall));
  const double denom = parts.precision + parts.recall;
  parts.f = denom == 0.0 ? 0.0 : 2.0 * parts.precision * parts.recall / denom;
  return parts;
}

}  // namespace detail

// Per-sample PARENT F-score; with several references the best one counts.
// Without references, precision falls back to table entailment and recall
// to table recall.
inline double ParentScore(std::string_view prediction, const std::vector<std::string>& references,
                          const std::vector<DataUnit>& units,
                          const std::optional<DataUnit>& name = std::nullopt,
                          const ParentParams& params = {}) {
  const auto table = TableEntries(units, name);
  if (references.empty() && table.empty()) {
    throw Error(ErrorKind::kUndefinedScore, "no references and no table");
  }
  const auto pred = detail::ScoringTokens(prediction);
  if (pred.empty()) return 0.0;
  if (table.empty()) throw Error(ErrorKind::kUndefinedScore, "empty table");
  std::set<std::string> table_tokens;
  for (const auto& e : table) table_tokens.insert(e.begin(), e.end());

  double best = 0.0;
  if (references.empty()) {
    return detail::ParentAgainst(pred, {}, table, table_tokens, params).f;
  }
  for (const auto& r : references) {
    best = std::max(best,
                    detail::ParentAgainst(pred, detail::ScoringTokens(r), table, table_tokens, params).f);
  }
  return best;
}

// Performance metrics are pluggable; PARENT is the default.
class PerformanceMetric {
 public:
  virtual ~PerformanceMetric() = default;
  virtual std::string name() const = 0;
  virtual double Score(std::string_view prediction, const Sample& sample) const = 0;
};

class ParentMetric : public PerformanceMetric {
 public:
  explicit ParentMetric(ParentParams params = {}) : params_(params) {}
  std::string name() const override { return "parent"; }
  double Score(std::string_view prediction, const Sample& sample) const override {
    return ParentScore(prediction, sample.references, sample.units, sample.name_unit, params_);
  }
  const ParentParams& params() const { return params_; }

 private:
  ParentParams params_;
};

// --- significance and seed averaging --------------------------------------

struct ScoreVector {
  std::vector<std::string> sample_ids;
  std::vector<double> scores;
  std::optional<std::string> seed_id;

  double Mean() const {
    if (scores.empty()) return 0.0;
    double s = 0.0;
    for (double v : scores) s += v;
    return s / static_cast<double>(scores.size());
  }
};

inline constexpr size_t kDefaultResamples = 10000;

// One-sided paired bootstrap for "a is lower than b": the fraction of
// resamples (sample indices drawn with replacement) where mean(a) >= mean(b).
inline double PairedBootstrap(const ScoreVector& a, const ScoreVector& b, size_t resamples,
                              uint64_t seed) {
  if (a.scores.size() != b.scores.size()) {
    throw Error(ErrorKind::kPairingError, "score vectors differ in length");
  }
  if (!a.sample_ids.empty() && !b.sample_ids.empty() && a.sample_ids != b.sample_ids) {
    throw Error(ErrorKind::kPairingError, "score vectors are not paired by sample id");
  }
  if (resamples == 0) throw Error(ErrorKind::kInvalidParameter, "resamples must be positive");
  const size_t n = a.scores.size();
  if (n == 0) throw Error(ErrorKind::kInvalidParameter, "empty score vectors");
  Rng rng(seed);
  size_t not_lower = 0;
  for (size_t r = 0; r < resamples; ++r) {
    double sa = 0.0, sb = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const auto k = static_cast<size_t>(rng.Below(n));
      sa += a.scores[k];
      sb += b.scores[k];
    }
    if (sa >= sb) ++not_lower;
  }
  return static_cast<double>(not_lower) / static_cast<double>(resamples);
}

// "‡" for p < 0.05, "†" for p < 0.1.
inline std::string SignificanceMarker(double p) {
  if (p < 0.05) return "‡";
  if (p < 0.1) return "†";
  return "";
}

struct SeedAverage {
  ScoreVector mean_vector;
  double mean = 0.0;
};

inline SeedAverage AverageOverSeeds(const std::vector<ScoreVector>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::kPairingError, "no score vectors");
  const size_t n = vectors.front().scores.size();
  for (const auto& v : vectors) {
    if (v.scores.size() != n) throw Error(ErrorKind::kPairingError, "score vectors differ in length");
    if (!v.sample_ids.empty() && !vectors.front().sample_ids.empty() &&
        v.sample_ids != vectors.front().sample_ids) {
      throw Error(ErrorKind::kPairingError, "score vectors are not paired by sample id");
    }
  }
  SeedAverage out;
  out.mean_vector.sample_ids = vectors.front().sample_ids;
  out.mean_vector.scores.assign(n, 0.0);
  for (const auto& v : vectors) {
    for (size_t i = 0; i < n; ++i) out.mean_vector.scores[i] += v.scores[i];
  }
  for (auto& s : out.mean_vector.scores) s /= static_cast<double>(vectors.size());
  out.mean = out.mean_vector.Mean();
  return out;
}

}  // namespace spor
