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

// Match training sets, permutation pairs, and the fidelity / data-ordering /
// CWIO measurements.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spor/alignment.hpp"
#include "spor/core.hpp"
#include "spor/io.hpp"
#include "spor/metrics.hpp"
#include "spor/predictions.hpp"
#include "spor/rng.hpp"

namespace spor {

// Reference order of the first reference whose order is determinable.
inline std::optional<std::vector<size_t>> FirstReferenceOrder(const Sample& sample,
                                                              const Lexicon& lexicon = {}) {
  for (const auto& ref : sample.references) {
    auto order = ReferenceOrder(sample, ref, lexicon);
    if (order) return order;
  }
  return std::nullopt;
}

inline std::vector<std::vector<size_t>> DeterminableReferenceOrders(const Sample& sample,
                                                                    const Lexicon& lexicon = {}) {
  std::vector<std::vector<size_t>> out;
  for (const auto& ref : sample.references) {
    auto order = ReferenceOrder(sample, ref, lexicon);
    if (order) out.push_back(std::move(*order));
  }
  return out;
}

inline Sample Reordered(const Sample& sample, const std::vector<size_t>& order) {
  Sample out = sample;
  out.units.clear();
  for (size_t i : order) out.units.push_back(sample.units[i]);
  return out;
}

struct MatchBuild {
  SplitArtifact artifact;
  std::vector<std::string> flagged;  // ids kept in original order
};

// Units rearranged by their occurrence in the first determinable reference.
inline MatchBuild BuildMatchTraining(const std::vector<Sample>& train, const Lexicon& lexicon = {}) {
  MatchBuild out;
  out.artifact.aspect = Aspect::kOrderInvariance;
  out.artifact.name = "match";
  for (const auto& s : train) {
    auto order = FirstReferenceOrder(s, lexicon);
    if (!order) {
      out.flagged.push_back(s.id);
      out.artifact.samples.push_back(s);
      continue;
    }
    out.artifact.samples.push_back(Reordered(s, *order));
  }
  out.artifact.metadata["flagged"] = std::to_string(out.flagged.size());
  out.artifact.metadata["samples"] = std::to_string(train.size());
  return out;
}

// Non-flagged samples whose re-derived reference order is not the identity.
inline std::vector<std::string> MatchRoundTripFailures(const MatchBuild& match,
                                                       const Lexicon& lexicon = {}) {
  const std::set<std::string> flagged(match.flagged.begin(), match.flagged.end());
  std::vector<std::string> bad;
  for (const auto& s : match.artifact.samples) {
    if (flagged.contains(s.id)) continue;
    auto order = FirstReferenceOrder(s, lexicon);
    bool identity = order.has_value();
    for (size_t i = 0; identity && i < order->size(); ++i) identity = (*order)[i] == i;
    if (!identity) bad.push_back(s.id);
  }
  return bad;
}

struct PermutationPair {
  std::string sample_id;
  std::vector<size_t> order_a;
  std::vector<size_t> order_b;
};

struct PairedSample {
  PermutationPair pair;
  Sample sample;
};

inline Json PairedSampleToJson(const PairedSample& p) {
  return Json{{"sample_id", p.pair.sample_id},
              {"order_a", p.pair.order_a},
              {"order_b", p.pair.order_b},
              {"sample", SampleToJson(p.sample)}};
}

inline PairedSample PairedSampleFromJson(const Json& j) {
  try {
    PairedSample p;
    p.pair.sample_id = j.at("sample_id").get<std::string>();
    p.pair.order_a = j.at("order_a").get<std::vector<size_t>>();
    p.pair.order_b = j.at("order_b").get<std::vector<size_t>>();
    p.sample = SampleFromJson(j.at("sample"));
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad permutation pair: ") + e.what());
  }
}

// Samples with at least two units and one determinable reference order, each
// with two distinct uniform permutations.
inline std::vector<PairedSample> GeneratePermutationPairs(const std::vector<Sample>& test,
                                                          uint64_t seed,
                                                          const Lexicon& lexicon = {}) {
  Rng rng(seed);
  std::vector<PairedSample> out;
  for (const auto& s : test) {
    if (s.size() < 2 || !FirstReferenceOrder(s, lexicon)) continue;
    PairedSample p;
    p.sample = s;
    p.pair.sample_id = s.id;
    p.pair.order_a = rng.Permutation(s.size());
    do {
      p.pair.order_b = rng.Permutation(s.size());
    } while (p.pair.order_b == p.pair.order_a);
    out.push_back(std::move(p));
  }
  return out;
}

// Kendall tau between an output order and a reference order, both restricted
// to the units in `present`. nullopt with fewer than two such units.
inline std::optional<double> RestrictedTau(const std::vector<size_t>& output_order,
                                           const std::vector<size_t>& reference_order,
                                           const std::vector<size_t>& present) {
  const std::set<size_t> keep(present.begin(), present.end());
  std::vector<size_t> a, b;
  for (size_t i : output_order) if (keep.contains(i)) a.push_back(i);
  for (size_t i : reference_order) if (keep.contains(i)) b.push_back(i);
  if (a.size() < 2 || a.size() != b.size()) return std::nullopt;
  return KendallTau(a, b);
}

struct OutputProperties {
  bool faithful = false;
  bool proper_order = false;
};

inline OutputProperties AssessOutput(const Sample& sample, std::string_view output,
                                     const std::vector<std::vector<size_t>>& reference_orders,
                                     const Lexicon& lexicon = {}) {
  const auto units = ExtractOutputUnits(sample, output, lexicon);
  OutputProperties p;
  p.faithful = units.present.size() == sample.units.size();
  for (const auto& ref : reference_orders) {
    auto tau = RestrictedTau(units.order, ref, units.present);
    if (tau && *tau > 0.0) {
      p.proper_order = true;
      break;
    }
  }
  return p;
}

struct PropertyCounts {
  size_t both = 0;
  size_t one = 0;
  size_t neither = 0;

  void Add(bool a, bool b) {
    if (a && b) {
      ++both;
    } else if (a || b) {
      ++one;
    } else {
      ++neither;
    }
  }
  size_t total() const { return both + one + neither; }
  double Pct(size_t n) const { return total() ? 100.0 * static_cast<double>(n) / total() : 0.0; }
};

struct OrderReport {
  PropertyCounts fidelity;
  PropertyCounts ordering;
  size_t n_evaluated = 0;
  std::optional<double> perf;

  double fidelity_pbh() const { return fidelity.Pct(fidelity.both); }
  double fidelity_poh() const { return fidelity.Pct(fidelity.one); }
  double ordering_pbh() const { return ordering.Pct(ordering.both); }
  double ordering_poh() const { return ordering.Pct(ordering.one); }
};

// `metric` is optional; when given, PERF is its mean over both outputs.
inline OrderReport EvaluateOrderInvariance(const std::vector<PairedSample>& pairs,
                                           const PredictionStore& predictions,
                                           const Lexicon& lexicon = {},
                                           const PerformanceMetric* metric = nullptr) {
  OrderReport report;
  double perf_sum = 0.0;
  size_t perf_n = 0;
  for (const auto& p : pairs) {
    const auto& a = predictions.Text(p.pair.sample_id, "a");
    const auto& b = predictions.Text(p.pair.sample_id, "b");
    const auto refs = DeterminableReferenceOrders(p.sample, lexicon);
    const auto pa = AssessOutput(p.sample, a, refs, lexicon);
    const auto pb = AssessOutput(p.sample, b, refs, lexicon);
    report.fidelity.Add(pa.faithful, pb.faithful);
    report.ordering.Add(pa.proper_order, pb.proper_order);
    ++report.n_evaluated;
    if (metric != nullptr) {
      perf_sum += metric->Score(a, p.sample) + metric->Score(b, p.sample);
      perf_n += 2;
    }
  }
  if (metric != nullptr && perf_n > 0) report.perf = perf_sum / static_cast<double>(perf_n);
  return report;
}

struct CwioReport {
  double cwio = 0.0;
  size_t n_evaluated = 0;
  size_t n_excluded = 0;  // fewer than two units localized in the output
  std::vector<std::string> sample_ids;
  std::vector<double> taus;
};

// Correlation of each output's unit order with the presented input order
// (the stored unit order), averaged over outputs with at least two units
// localized.
inline CwioReport ComputeCwio(const std::vector<Sample>& samples, const PredictionStore& predictions,
                              const Lexicon& lexicon = {}, const std::string& variant = "orig") {
  CwioReport report;
  double sum = 0.0;
  for (const auto& s : samples) {
    const auto& text = predictions.Text(s.id, variant);
    const auto units = ExtractOutputUnits(s, text, lexicon);
    auto tau = RestrictedTau(units.order, units.present, units.present);
    if (!tau) {
      ++report.n_excluded;
      continue;
    }
    sum += *tau;
    ++report.n_evaluated;
    report.sample_ids.push_back(s.id);
    report.taus.push_back(*tau);
  }
  if (report.n_evaluated > 0) report.cwio = sum / static_cast<double>(report.n_evaluated);
  return report;
}

}  // namespace spor
