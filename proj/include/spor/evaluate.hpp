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

// Aspect-level evaluation: per-seed scoring, seed averaging, significance,
// and the rendered tables.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spor/alignment.hpp"
#include "spor/core.hpp"
#include "spor/io.hpp"
#include "spor/metrics.hpp"
#include "spor/order_invariance.hpp"
#include "spor/predictions.hpp"
#include "spor/rules.hpp"
#include "spor/runner.hpp"

namespace spor {

struct AspectResult {
  Json json;
  std::string table;
};

inline ScoreVector ScoreStore(const std::vector<Sample>& test, const PredictionStore& store,
                              const PerformanceMetric& metric, const std::string& variant = "orig") {
  ScoreVector v;
  for (const auto& s : test) {
    v.sample_ids.push_back(s.id);
    v.scores.push_back(metric.Score(store.Text(s.id, variant), s));
  }
  return v;
}

inline Json ParentParamsToJson(const ParentParams& p) {
  return Json{{"max_order", p.max_order},
              {"lambda", p.lambda},
              {"smoothing", p.smoothing},
              {"mention_smoothing", p.mention_smoothing},
              {"mode", "word-overlap"}};
}

// Models trained on set `a` and on set `b`, one prediction store per seed.
// The one-sided test asks whether `a` scores lower than `b`.
inline AspectResult EvaluateTwinSets(const std::string& name_a, const std::string& name_b,
                                     const std::vector<Sample>& test,
                                     const std::vector<PredictionStore>& a,
                                     const std::vector<PredictionStore>& b,
                                     const PerformanceMetric& metric, size_t resamples,
                                     uint64_t bootstrap_seed) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::kInvalidParameter, "need predictions for both sets");
  std::vector<ScoreVector> va, vb;
  for (const auto& s : a) va.push_back(ScoreStore(test, s, metric));
  for (const auto& s : b) vb.push_back(ScoreStore(test, s, metric));
  const auto ma = AverageOverSeeds(va);
  const auto mb = AverageOverSeeds(vb);
  const double p = PairedBootstrap(ma.mean_vector, mb.mean_vector, resamples, bootstrap_seed);

  auto per_seed = [](const std::vector<ScoreVector>& v) {
    Json j = Json::array();
    for (const auto& x : v) j.push_back(x.Mean());
    return j;
  };
  AspectResult r;
  r.json = Json{{"metric", metric.name()},
                {"n_samples", test.size()},
                {name_a, {{"per_seed", per_seed(va)}, {"mean", ma.mean}}},
                {name_b, {{"per_seed", per_seed(vb)}, {"mean", mb.mean}}},
                {"p_value", p},
                {"marker", SignificanceMarker(p)},
                {"resamples", resamples},
                {"bootstrap_seed", bootstrap_seed},
                {"hypothesis", name_a + " lower than " + name_b}};

  std::vector<std::string> header{"training set"};
  for (size_t i = 0; i < std::max(va.size(), vb.size()); ++i) header.push_back("seed " + std::to_string(i + 1));
  header.push_back("mean");
  TextTable t(header);
  auto row = [&](const std::string& name, const std::vector<ScoreVector>& v, double mean,
                 const std::string& marker) {
    std::vector<std::string> cells{name};
    for (size_t i = 0; i + 2 < header.size(); ++i) {
      cells.push_back(i < v.size() ? FormatFixed(100.0 * v[i].Mean()) : "-");
    }
    cells.push_back(FormatFixed(100.0 * mean) + marker);
    t.Add(cells);
  };
  row(name_a, va, ma.mean, SignificanceMarker(p));
  row(name_b, vb, mb.mean, "");
  r.table = t.Render() + "\n" + metric.name() + " x100; p = " + FormatFixed(p, 4) +
            " (one-sided paired bootstrap, " + std::to_string(resamples) +
            " resamples); ‡ p<0.05, † p<0.1\n";
  return r;
}

inline Json OrderReportToJson(const OrderReport& o) {
  Json j{{"fidelity_pbh", o.fidelity_pbh()},
         {"fidelity_poh", o.fidelity_poh()},
         {"fidelity_neither", o.fidelity.Pct(o.fidelity.neither)},
         {"ordering_pbh", o.ordering_pbh()},
         {"ordering_poh", o.ordering_poh()},
         {"ordering_neither", o.ordering.Pct(o.ordering.neither)},
         {"n_evaluated", o.n_evaluated}};
  if (o.perf) j["perf"] = *o.perf;
  return j;
}

// Permutation-pair predictions (variants a/b) per seed; when `test` is
// given, CWIO is computed from the "orig" predictions in the same stores.
inline AspectResult EvaluateOrderAspect(const std::vector<PairedSample>& pairs,
                                        const std::vector<PredictionStore>& stores,
                                        const std::vector<Sample>* test, const Lexicon& lexicon,
                                        const PerformanceMetric* metric) {
  if (stores.empty()) throw Error(ErrorKind::kInvalidParameter, "no prediction stores");
  Json seeds = Json::array();
  std::map<std::string, double> sum;
  bool have_cwio = false, have_perf = false;
  for (const auto& store : stores) {
    const auto o = EvaluateOrderInvariance(pairs, store, lexicon, metric);
    Json j = OrderReportToJson(o);
    if (test != nullptr) {
      const auto c = ComputeCwio(*test, store, lexicon);
      j["cwio"] = c.cwio;
      j["cwio_evaluated"] = c.n_evaluated;
      j["cwio_excluded"] = c.n_excluded;
      have_cwio = true;
    }
    have_perf = o.perf.has_value();
    for (const auto* k : {"fidelity_pbh", "fidelity_poh", "ordering_pbh", "ordering_poh", "cwio", "perf"}) {
      if (j.contains(k)) sum[k] += j[k].get<double>();
    }
    seeds.push_back(std::move(j));
  }
  Json mean = Json::object();
  for (const auto& [k, v] : sum) mean[k] = v / static_cast<double>(stores.size());

  AspectResult r;
  r.json = Json{{"per_seed", seeds}, {"mean", mean}, {"n_pairs", pairs.size()}};
  TextTable t({"", "fidelity PBH", "fidelity POH", "ordering PBH", "ordering POH", "CWIO", "PERF"});
  auto cell = [](const Json& j, const char* k, bool pct) {
    if (!j.contains(k)) return std::string("-");
    const double v = j[k].get<double>();
    if (pct) return FormatFixed(v, 2);
    return (v >= 0 ? "+" : "") + FormatFixed(v, 2);
  };
  for (size_t i = 0; i < seeds.size(); ++i) {
    const auto& j = seeds[i];
    t.Add({"seed " + std::to_string(i + 1), cell(j, "fidelity_pbh", true), cell(j, "fidelity_poh", true),
           cell(j, "ordering_pbh", true), cell(j, "ordering_poh", true), cell(j, "cwio", false),
           j.contains("perf") ? FormatFixed(100.0 * j["perf"].get<double>()) : "-"});
  }
  t.Add({"mean", cell(mean, "fidelity_pbh", true), cell(mean, "fidelity_poh", true),
         cell(mean, "ordering_pbh", true), cell(mean, "ordering_poh", true),
         have_cwio ? cell(mean, "cwio", false) : "-",
         have_perf ? FormatFixed(100.0 * mean["perf"].get<double>()) : "-"});
  r.table = t.Render() + "\nPBH/POH in %; CWIO is a mean Kendall tau; PERF x100\n";
  return r;
}

inline AspectResult EvaluateRulesAspect(const std::vector<HiddenSample>& hidden,
                                        const std::vector<PredictionStore>& stores) {
  if (stores.empty()) throw Error(ErrorKind::kInvalidParameter, "no prediction stores");
  static const char* kCases[4] = {"(0, 0)", "(0, 1)", "(1, 0)", "(1, 1)"};
  Json seeds = Json::array();
  double sum[4] = {0, 0, 0, 0};
  for (const auto& store : stores) {
    std::vector<CopyCheckResult> results;
    for (const auto& h : hidden) results.push_back(CheckCopy(h, store.Text(h.base.id, "orig")));
    const auto rep = AggregateRuleReport(results);
    Json j = Json::object();
    for (int k = 0; k < 4; ++k) {
      const double pct = rep.Pct(k >= 2, k % 2 == 1);
      j[kCases[k]] = pct;
      sum[k] += pct;
    }
    j["n"] = rep.total;
    seeds.push_back(std::move(j));
  }
  Json mean = Json::object();
  for (int k = 0; k < 4; ++k) mean[kCases[k]] = sum[k] / static_cast<double>(stores.size());

  AspectResult r;
  r.json = Json{{"per_seed", seeds}, {"mean", mean}, {"n_samples", hidden.size()}};
  TextTable t({"", kCases[0], kCases[1], kCases[2], kCases[3]});
  for (size_t i = 0; i < seeds.size(); ++i) {
    std::vector<std::string> row{"seed " + std::to_string(i + 1)};
    for (int k = 0; k < 4; ++k) row.push_back(FormatFixed(seeds[i][kCases[k]].get<double>()));
    t.Add(row);
  }
  std::vector<std::string> row{"mean"};
  for (int k = 0; k < 4; ++k) row.push_back(FormatFixed(mean[kCases[k]].get<double>()));
  t.Add(row);
  r.table = t.Render() + "\nshares in %; (1, 0) is a correct copy\n";
  return r;
}

}  // namespace spor
