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
// Acceptance checks. One line per criterion: PASS, FAIL or SKIP, then the
// measured numbers. Exit status is nonzero when any line fails.
//
// Corpus-dependent lines run when the data is present:
//   SPOR_WEBNLG_DIR  holding train/ and test/ (WebNLG+ XML or JSON)
//   SPOR_E2E_DIR     holding trainset.csv and testset_w_refs.csv

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "spor.hpp"

namespace fs = std::filesystem;
using namespace spor;

namespace {

// Tolerances and targets.
constexpr size_t kSyntheticCorpora = 50;
constexpr size_t kSyntheticMaxSamples = 200;
constexpr double kDivergenceLimit = 0.02;
constexpr double kDivergenceSlack = 1e-12;
constexpr double kCorpusSeconds = 300.0;
constexpr double kSystematicityTarget = 2360;
constexpr double kSystematicityBand = 0.15;
constexpr double kSizeBand = 0.10;
constexpr double kBoundaryLimit = 0.05;
constexpr double kHiddenTripleTarget = 1614;
constexpr size_t kChernoffPairs = 1000;
constexpr double kChernoffTol = 1e-12;
constexpr double kParentTol = 1e-9;
constexpr double kBootstrapAlpha = 0.05;
constexpr size_t kBootstrapResamples = 10000;
constexpr double kPctTol = 1e-9;
constexpr size_t kSmokeSamples = 100;
constexpr double kSmokeSeconds = 120.0;

int failures = 0;

void Report(const std::string& id, const std::string& what, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s  %-4s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str(), detail.c_str());
  std::fflush(stdout);
}

void Skip(const std::string& id, const std::string& what, const std::string& why) {
  std::printf("SKIP  %-4s %s: %s\n", id.c_str(), what.c_str(), why.c_str());
  std::fflush(stdout);
}

// Runs `fn`, turning a thrown exception into a failed line.
void Check(const std::string& id, const std::string& what, const std::function<std::string(bool&)>& fn) {
  bool ok = true;
  std::string detail;
  try {
    detail = fn(ok);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  Report(id, what, ok, detail);
}

std::string Fmt(double v, int digits = 4) { return FormatFixed(v, digits); }

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool Within(double value, double target, double band) {
  return std::abs(value - target) <= band * target;
}

// --- independent oracles ----------------------------------------------------

double OracleChernoff(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  double tp = 0, tq = 0;
  for (const auto& [k, v] : p) tp += v;
  for (const auto& [k, v] : q) tq += v;
  double bc = 0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    if (it != q.end()) bc += std::sqrt((v / tp) * (it->second / tq));
  }
  return 1.0 - bc;
}

std::map<std::string, double> Occurrences(const std::vector<Sample>& samples,
                                          const std::set<std::string>* only = nullptr) {
  std::map<std::string, double> out;
  for (const auto& s : samples) {
    for (const auto& u : s.units) {
      if (!only || only->contains(u.id())) out[u.id()] += 1;
    }
  }
  return out;
}

std::set<std::string> Ids(const std::vector<Sample>& samples) {
  std::set<std::string> out;
  for (const auto& s : samples) {
    for (const auto& u : s.units) out.insert(u.id());
  }
  return out;
}

double OracleKendall(const std::vector<int>& a, const std::vector<int>& b) {
  // Sign agreement over every item pair, positions looked up by linear scan.
  auto pos = [](const std::vector<int>& v, int x) {
    return static_cast<int>(std::find(v.begin(), v.end(), x) - v.begin());
  };
  const int n = static_cast<int>(a.size());
  int agree = 0, total = 0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      const bool in_a = pos(a, x) < pos(a, y);
      const bool in_b = pos(b, x) < pos(b, y);
      agree += in_a == in_b ? 1 : -1;
      ++total;
    }
  }
  return static_cast<double>(agree) / total;
}

std::string Fnv1a64(const std::string& s) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- synthetic data ---------------------------------------------------------

Sample Abstract(const std::string& id, const std::vector<std::string>& names) {
  Sample s;
  s.id = id;
  for (const auto& n : names) s.units.push_back(DataUnit::KeyValue("u", n));
  s.references = {"ref"};
  return s;
}

std::string Id(const char* prefix, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
  return buf;
}

std::vector<Sample> RandomAbstract(Rng& rng, size_t n, size_t vocab, size_t max_size, const char* prefix) {
  std::vector<Sample> out;
  for (size_t i = 0; i < n; ++i) {
    if (!out.empty() && rng.Below(10) == 0) {
      Sample dup = out[rng.Below(out.size())];
      dup.id = Id(prefix, i);
      out.push_back(std::move(dup));
      continue;
    }
    const auto perm = rng.Permutation(vocab);
    const size_t k = std::min<size_t>(vocab, 1 + rng.Below(max_size));
    std::vector<std::string> names;
    for (size_t j = 0; j < k; ++j) names.push_back("x" + std::to_string(perm[j]));
    out.push_back(Abstract(Id(prefix, i), names));
  }
  return out;
}

const std::vector<std::string> kPredicates{"location", "leader", "genre",    "country",
                                           "founder",  "operator", "capital", "language"};

// Pseudo-words pairwise farther apart than the matcher's edit-distance
// allowance, and far from every predicate and prompt token.
std::vector<std::string> PseudoWords(Rng& rng, size_t n) {
  static const char* kOnset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* kVowel[] = {"a", "e", "i", "o", "u"};
  std::vector<std::string> taken{"head", "relation", "tail", "translate", "from", "triple", "text", "entity"};
  for (const auto& p : kPredicates) taken.push_back(p);
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    for (int s = 0; s < 3; ++s) w += std::string(kOnset[rng.Below(14)]) + kVowel[rng.Below(5)];
    w += kOnset[rng.Below(14)];
    bool far = true;
    for (const auto& t : taken) {
      if (EditDistance(w, t) <= 3) {
        far = false;
        break;
      }
    }
    if (!far) continue;
    taken.push_back(w);
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    out.push_back(w);
  }
  return out;
}

std::string Spaced(const std::string& entity) { return UnderscoresToSpaces(entity); }

std::string SayTriple(const DataUnit& u) {
  return Spaced(u.subject()) + " " + u.predicate() + " " + Spaced(u.object()) + ".";
}

std::string SayTriples(const Sample& s, const std::vector<size_t>& order) {
  std::string out;
  for (size_t i : order) out += (out.empty() ? "" : " ") + SayTriple(s.units[i]);
  return out;
}

std::vector<size_t> Iota(size_t n) {
  std::vector<size_t> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Triple samples whose entities are all distinct, some of two tokens.
std::vector<Sample> DisjointTripleSamples(Rng& rng, size_t n, const char* prefix) {
  const auto words = PseudoWords(rng, 600);
  std::vector<Sample> out;
  for (size_t i = 0; i < n; ++i) {
    Sample s;
    s.id = Id(prefix, i);
    const size_t k = 2 + rng.Below(5);
    const auto perm = rng.Permutation(words.size());
    size_t next = 0;
    auto entity = [&] {
      std::string e = words[perm[next++]];
      if (rng.Below(3) == 0) e += "_" + words[perm[next++]];
      return e;
    };
    for (size_t j = 0; j < k; ++j) {
      const std::string subj = entity();
      const std::string obj = entity();
      s.units.push_back(DataUnit::Triple(subj, kPredicates[rng.Below(kPredicates.size())], obj));
    }
    s.references = {SayTriples(s, rng.Permutation(k))};
    out.push_back(std::move(s));
  }
  return out;
}

Lexicon FamilyLexicon() {
  Lexicon lex;
  lex.forms["family friendly"]["yes"] = {"family friendly"};
  lex.forms["family friendly"]["no"] = {"not family friendly"};
  return lex;
}

const std::map<std::string, std::vector<std::string>> kKvValues{
    {"food", {"Chinese", "Italian", "French", "Indian", "Japanese"}},
    {"area", {"riverside", "city centre"}},
    {"eat type", {"pub", "coffee shop", "restaurant"}},
    {"price range", {"cheap", "moderate", "more than £30"}},
    {"customer rating", {"low", "average", "5 out of 5"}},
    {"family friendly", {"yes", "no"}}};

std::string SayValue(const DataUnit& u) {
  if (u.attribute() == "family friendly") return u.value() == "yes" ? "family friendly" : "not family friendly";
  return u.value();
}

std::string SayValues(const Sample& s, const std::vector<size_t>& order) {
  std::string out = s.name_unit ? s.name_unit->value() + " is" : "It is";
  for (size_t i : order) out += " " + SayValue(s.units[i]) + ",";
  out.back() = '.';
  return out;
}

std::vector<Sample> KvSamples(Rng& rng, size_t n, const char* prefix) {
  std::vector<std::string> attrs;
  for (const auto& [a, v] : kKvValues) attrs.push_back(a);
  std::vector<Sample> out;
  for (size_t i = 0; i < n; ++i) {
    Sample s;
    s.id = Id(prefix, i);
    s.name_unit = DataUnit::KeyValue("name", "The Vexor");
    const auto perm = rng.Permutation(attrs.size());
    const size_t k = 2 + rng.Below(attrs.size() - 1);
    for (size_t j = 0; j < k; ++j) {
      const auto& vals = kKvValues.at(attrs[perm[j]]);
      s.units.push_back(DataUnit::KeyValue(attrs[perm[j]], vals[rng.Below(vals.size())]));
    }
    s.references = {SayValues(s, rng.Permutation(k))};
    out.push_back(std::move(s));
  }
  return out;
}

// --- criterion 1 / 2 / 3 on a corpus ---------------------------------------

struct SysCheck {
  bool ok = true;
  std::string why;
  double divergence = 0;
  size_t test = 0;
};

SysCheck CheckSystematicity(const SystematicitySplit& split) {
  SysCheck c;
  auto fail = [&](const std::string& w) {
    if (c.ok) c.why = w;
    c.ok = false;
  };
  c.test = split.test.samples.size();
  const auto atoms = Ids(split.test.samples);
  for (const auto& s : split.atom.samples) {
    size_t held = 0;
    for (const auto& u : s.units) held += atoms.contains(u.id());
    if (held >= 2) fail("atom pair in Atom sample " + s.id);
  }
  std::set<std::string> in_atom, in_comb;
  for (const auto& id : Ids(split.atom.samples)) if (atoms.contains(id)) in_atom.insert(id);
  for (const auto& id : Ids(split.combination.samples)) if (atoms.contains(id)) in_comb.insert(id);
  if (in_atom != atoms || in_comb != atoms) fail("atom coverage differs");
  if (!atoms.empty()) {
    c.divergence = OracleChernoff(Occurrences(split.atom.samples, &atoms),
                                  Occurrences(split.combination.samples, &atoms));
    if (c.divergence > kDivergenceLimit + kDivergenceSlack) fail("divergence " + Fmt(c.divergence, 6));
  }
  if (split.replacements > 0) {
    bool pair = false;
    for (const auto& s : split.combination.samples) {
      size_t held = 0;
      for (const auto& u : s.units) held += atoms.contains(u.id());
      pair = pair || held >= 2;
    }
    if (!pair) fail("no pair in Combination after replacements");
  }
  try {
    VerifySystematicity(split);
  } catch (const Error& e) {
    fail(std::string("library verification: ") + e.what());
  }
  return c;
}

struct ProdCheck {
  bool ok = true;
  std::string why;
  double divergence = 0;
  size_t test = 0;
};

ProdCheck CheckProductivity(const ProductivitySplit& split, size_t n) {
  ProdCheck c;
  auto fail = [&](const std::string& w) {
    if (c.ok) c.why = w;
    c.ok = false;
  };
  c.test = split.test.samples.size();
  size_t inv_total = 0, vis_total = 0;
  for (const auto& s : split.invisible.samples) {
    inv_total += s.units.size();
    if (s.units.size() > n) fail("Invisible sample " + s.id + " larger than N");
  }
  for (const auto& s : split.visible.samples) vis_total += s.units.size();
  if (inv_total != vis_total) fail("unit totals " + std::to_string(inv_total) + " vs " + std::to_string(vis_total));
  if (inv_total > 0) {
    c.divergence = OracleChernoff(Occurrences(split.invisible.samples), Occurrences(split.visible.samples));
    if (c.divergence > kDivergenceLimit + kDivergenceSlack) fail("divergence " + Fmt(c.divergence, 6));
  }
  const auto inv = Ids(split.invisible.samples), vis = Ids(split.visible.samples);
  for (const auto& s : split.test.samples) {
    if (s.units.size() <= n) fail("test sample " + s.id + " not larger than N");
    for (const auto& u : s.units) {
      if (!inv.contains(u.id()) || !vis.contains(u.id())) fail("test unit missing from a training set");
    }
  }
  try {
    VerifyProductivity(split);
  } catch (const Error& e) {
    fail(std::string("library verification: ") + e.what());
  }
  return c;
}

// --- criteria -----------------------------------------------------------------

void SyntheticSystematicity() {
  Check("1", "systematicity invariants, 50 synthetic corpora", [](bool& ok) {
    Rng rng(20261014);
    double worst = 0;
    size_t tests = 0, replaced = 0;
    std::string why;
    for (size_t c = 0; c < kSyntheticCorpora; ++c) {
      Corpus corpus;
      corpus.dialect = Dialect::kKeyValue;
      const size_t n = 20 + rng.Below(kSyntheticMaxSamples - 19);
      corpus.train = RandomAbstract(rng, n, 8 + rng.Below(40), 1 + rng.Below(7), "s");
      corpus.RebuildVocabulary();
      const auto split = BestOfRestarts(corpus, {20, c, kDivergenceLimit, AtomicityGuard::kStrict});
      const auto r = CheckSystematicity(split);
      worst = std::max(worst, r.divergence);
      tests += r.test;
      replaced += split.replacements > 0;
      if (!r.ok && why.empty()) why = "corpus " + std::to_string(c) + ": " + r.why;
      ok = ok && r.ok;
    }
    return why.empty() ? "max divergence " + Fmt(worst, 6) + ", " + std::to_string(tests) +
                             " test samples, " + std::to_string(replaced) + " corpora with replacements"
                       : why;
  });
}

void SyntheticProductivity() {
  Check("3", "productivity invariants, 50 synthetic corpora x N=3,4,5", [](bool& ok) {
    Rng rng(7);
    double worst = 0;
    size_t tests = 0;
    std::string why;
    for (size_t c = 0; c < kSyntheticCorpora; ++c) {
      Corpus corpus;
      corpus.dialect = Dialect::kKeyValue;
      const size_t vocab = 8 + rng.Below(30);
      corpus.train = RandomAbstract(rng, 20 + rng.Below(kSyntheticMaxSamples - 19), vocab, 8, "s");
      corpus.test = RandomAbstract(rng, 30, vocab, 8, "t");
      corpus.RebuildVocabulary();
      for (size_t n : {3, 4, 5}) {
        const auto split = BuildProductivitySplit(corpus, n, kDivergenceLimit, c);
        const auto r = CheckProductivity(split, n);
        worst = std::max(worst, r.divergence);
        tests += r.test;
        if (!r.ok && why.empty()) why = "corpus " + std::to_string(c) + " N=" + std::to_string(n) + ": " + r.why;
        ok = ok && r.ok;
      }
    }
    return why.empty() ? "max divergence " + Fmt(worst, 6) + ", " + std::to_string(tests) + " test samples" : why;
  });
}

void AlignmentFixture() {
  Check("4a", "localization recovers hand-labeled positions", [](bool& ok) {
    const Json labels = Json::parse(ReadFile(fs::path(SPOR_FIXTURE_DIR) / "alignment_labels.json"));
    size_t sentences = 0, checked = 0, wrong = 0;
    std::string first;
    for (const auto& f : labels.at("triples")) {
      ++sentences;
      std::vector<std::string> entities;
      for (const auto& [e, v] : f.at("labels").items()) entities.push_back(e);
      const auto pos = LocalizeEntities(entities, f.at("text").get<std::string>());
      for (const auto& [e, v] : f.at("labels").items()) {
        const Position p = pos.at(e);
        const bool match = v.is_string() ? p.kind == PositionKind::kBoundary : (p.found() && p.index == v.get<int>());
        ++checked;
        if (!match) {
          ++wrong;
          if (first.empty()) first = e;
        }
      }
    }
    ok = sentences >= 30 && wrong == 0;
    return std::to_string(sentences) + " sentences, " + std::to_string(checked) + " labels, " +
           std::to_string(wrong) + " mismatches" + (first.empty() ? "" : " (first: " + first + ")");
  });

  Check("4c", "Kendall tau vs all-pairs oracle, exhaustive n<=6", [](bool& ok) {
    size_t cases = 0;
    double worst = 0;
    for (int n = 2; n <= 6; ++n) {
      std::vector<int> a(n);
      for (int i = 0; i < n; ++i) a[i] = i;
      std::vector<std::vector<int>> perms;
      do perms.push_back(a);
      while (std::next_permutation(a.begin(), a.end()));
      for (const auto& x : perms) {
        for (const auto& y : perms) {
          worst = std::max(worst, std::abs(KendallTau(x, y) - OracleKendall(x, y)));
          ++cases;
        }
      }
    }
    ok = worst <= 1e-12;
    return std::to_string(cases) + " ranking pairs, max |diff| " + Fmt(worst, 15);
  });
}

void OrderBookkeeping() {
  Check("5a", "PBH + POH + neither partitions the pairs", [](bool& ok) {
    Rng rng(11);
    const auto samples = DisjointTripleSamples(rng, 200, "p");
    const auto pairs = GeneratePermutationPairs(samples, 3);
    // Each output keeps a random subset of units in random order; the kept
    // set decides fidelity, independently of the localizer.
    PredictionStore store;
    PropertyCounts expected;
    for (const auto& p : pairs) {
      bool full[2];
      for (int v = 0; v < 2; ++v) {
        std::vector<size_t> keep;
        for (size_t i : rng.Permutation(p.sample.size())) {
          if (rng.Below(4) != 0) keep.push_back(i);
        }
        if (keep.empty()) keep.push_back(0);
        full[v] = keep.size() == p.sample.size();
        store.Add({p.sample.id, v == 0 ? "a" : "b", SayTriples(p.sample, keep), ""});
      }
      expected.Add(full[0], full[1]);
    }
    const auto r = EvaluateOrderInvariance(pairs, store);
    const double fid = r.fidelity_pbh() + r.fidelity_poh() + r.fidelity.Pct(r.fidelity.neither);
    const double ord = r.ordering_pbh() + r.ordering_poh() + r.ordering.Pct(r.ordering.neither);
    ok = r.fidelity.total() == pairs.size() && r.ordering.total() == pairs.size() &&
         std::abs(fid - 100) <= kPctTol && std::abs(ord - 100) <= kPctTol &&
         r.fidelity.both == expected.both && r.fidelity.one == expected.one &&
         r.fidelity.neither == expected.neither;
    return std::to_string(pairs.size()) + " pairs; fidelity " + std::to_string(r.fidelity.both) + "/" +
           std::to_string(r.fidelity.one) + "/" + std::to_string(r.fidelity.neither) + " (expected " +
           std::to_string(expected.both) + "/" + std::to_string(expected.one) + "/" +
           std::to_string(expected.neither) + "); ordering " + std::to_string(r.ordering.both) + "/" +
           std::to_string(r.ordering.one) + "/" + std::to_string(r.ordering.neither);
  });

  Check("5b", "Match round trip on non-flagged training pairs", [](bool& ok) {
    Rng rng(12);
    auto train = DisjointTripleSamples(rng, 300, "m");
    // A second reference order per sample; the first reference sometimes
    // drops a unit, which makes it undeterminable.
    std::map<std::string, std::optional<std::vector<DataUnit>>> truth;
    for (auto& s : train) {
      const auto o1 = rng.Permutation(s.size());
      auto o0 = rng.Permutation(s.size());
      const int mode = static_cast<int>(rng.Below(5));
      std::optional<std::vector<size_t>> used = o0;
      if (mode == 0) {
        o0.pop_back();
        used = o1;
      }
      s.references = {SayTriples(s, o0)};
      if (mode == 1) {
        auto o1_short = o1;
        o1_short.pop_back();
        s.references.push_back(SayTriples(s, o1_short));
      } else {
        s.references.push_back(SayTriples(s, o1));
      }
      std::vector<DataUnit> units;
      for (size_t i : *used) units.push_back(s.units[i]);
      truth[s.id] = units;
    }
    // Samples with no determinable reference.
    for (size_t i = 0; i < 20; ++i) {
      auto& s = train[i];
      auto o = Iota(s.size());
      o.pop_back();
      s.references = {SayTriples(s, o)};
      truth[s.id] = std::nullopt;
    }
    const auto match = BuildMatchTraining(train);
    const auto failures = MatchRoundTripFailures(match);
    std::set<std::string> flagged(match.flagged.begin(), match.flagged.end());
    size_t checked = 0, bad = 0;
    for (const auto& s : match.artifact.samples) {
      const auto& t = truth.at(s.id);
      if (flagged.contains(s.id)) {
        bad += t.has_value();
        continue;
      }
      ++checked;
      bad += !t || (*t != s.units) || FirstReferenceOrder(s) != Iota(s.size());
    }
    size_t expected_flags = 0;
    for (const auto& [id, t] : truth) expected_flags += !t.has_value();
    ok = failures.empty() && bad == 0 && flagged.size() == expected_flags &&
         match.artifact.samples.size() == train.size();
    return std::to_string(checked) + " non-flagged pairs, " + std::to_string(bad) + " wrong, " +
           std::to_string(flagged.size()) + " flagged (expected " + std::to_string(expected_flags) + ")";
  });

  Check("5c", "copy-input-order generator: CWIO = +1, fidelity PBH = 100%", [](bool& ok) {
    Rng rng(13);
    std::string detail;
    ok = true;
    for (int dialect = 0; dialect < 2; ++dialect) {
      const bool triples = dialect == 0;
      const auto samples = triples ? DisjointTripleSamples(rng, 200, "c") : KvSamples(rng, 200, "k");
      const Lexicon lex = triples ? Lexicon{} : FamilyLexicon();
      auto say = [&](const Sample& s, const std::vector<size_t>& o) {
        return triples ? SayTriples(s, o) : SayValues(s, o);
      };
      const auto pairs = GeneratePermutationPairs(samples, 5, lex);
      PredictionStore store;
      for (const auto& s : samples) store.Add({s.id, "orig", say(s, Iota(s.size())), ""});
      for (const auto& p : pairs) {
        store.Add({p.sample.id, "a", say(p.sample, p.pair.order_a), ""});
        store.Add({p.sample.id, "b", say(p.sample, p.pair.order_b), ""});
      }
      // Presented order for the permuted variants goes through CWIO on the
      // reordered samples.
      std::vector<Sample> presented;
      PredictionStore presented_store;
      for (const auto& p : pairs) {
        for (int v = 0; v < 2; ++v) {
          Sample r = Reordered(p.sample, v == 0 ? p.pair.order_a : p.pair.order_b);
          r.id += v == 0 ? "#a" : "#b";
          presented_store.Add({r.id, "orig", say(r, Iota(r.size())), ""});
          presented.push_back(std::move(r));
        }
      }
      const auto cw = ComputeCwio(samples, store, lex);
      const auto cwp = ComputeCwio(presented, presented_store, lex);
      const auto rep = EvaluateOrderInvariance(pairs, store, lex);
      const bool good = cw.cwio == 1.0 && cw.n_excluded == 0 && cwp.cwio == 1.0 && cwp.n_excluded == 0 &&
                        rep.fidelity_pbh() == 100.0 && !pairs.empty();
      ok = ok && good;
      detail += std::string(detail.empty() ? "" : "; ") + (triples ? "triples" : "key-value") + ": CWIO " +
                Fmt(cw.cwio, 6) + " / " + Fmt(cwp.cwio, 6) + " on " + std::to_string(pairs.size()) +
                " pairs, fidelity PBH " + Fmt(rep.fidelity_pbh(), 2) + "%";
    }
    return detail;
  });
}

HiddenEntry Ent(const std::string& label, const std::string& original) {
  return {label, original, std::nullopt, label, "", {}};
}

HiddenEntry Val(const std::string& label, const std::string& attribute, const std::string& original,
                const std::string& phrase, const std::string& token) {
  static const std::vector<std::string> price{"less than £20", "more than £30", "£20-25"};
  static const std::vector<std::string> rating{"1 out of 5", "3 out of 5", "5 out of 5"};
  return {label, original, attribute, phrase, token, attribute == "price range" ? price : rating};
}

HiddenSample Case(Dialect d, std::vector<HiddenEntry> hidden) {
  HiddenSample h;
  h.dialect = d;
  h.base.id = "case";
  h.base.units = {d == Dialect::kTriple ? DataUnit::Triple("Entity 1", "p", "x") : DataUnit::KeyValue("food", "Italian")};
  h.hidden = std::move(hidden);
  return h;
}

void RuleFixtures() {
  Check("6a", "copy-rule fixtures classify as published", [](bool& ok) {
    struct Fixture {
      HiddenSample h;
      std::string output;
      std::string label;
    };
    const Dialect T = Dialect::kTriple, K = Dialect::kKeyValue;
    const std::vector<Fixture> fx{
        {Case(T, {Ent("Entity 1", "Delta_II")}),
         "The Antares rocket, manufactured by the Yuzhnoye Design Office, was launched from the "
         "Mid-Atlantic Regional Spaceport and the Vandenberg Air Force Base in the United States.",
         "(0, 0)"},
        {Case(T, {Ent("Entity 1", "American_Journal_of_Mathematics")}),
         "The American Journal of Mathematics (abbreviated to Am. J. Math.) has the ISSN number 1080-6377.",
         "(0, 1)"},
        {Case(T, {Ent("Entity 1", "Addis_Ababa_City_Hall"), Ent("Entity 2", "Ethiopia")}),
         "Addis Ababa Stadium is located in Addis Ababa, Ethiopia. Entity 1 is located in Addis Ababa. "
         "Mulatu Teshome and Hailemariam Desalegn are leaders of Entity 2.",
         "(1, 1)"},
        {Case(K, {Val("Value A", "price range", "less than £20", "less than Value A", "£20"),
                  Val("Value B", "customer rating", "3 out of 5", "Value B out of 5", "3")}),
         "The Twenty Two is a pub located in the city centre near Café Rouge. It serves Italian food and "
         "has a customer rating of Value B out of 5. It is not family friendly.",
         "(0, 0)"},
        {Case(K, {Val("Value A", "price range", "more than £30", "more than Value A", "£30"),
                  Val("Value B", "customer rating", "1 out of 5", "Value B out of 5", "1")}),
         "Loch Fyne is a coffee shop near The Sorrento in the city centre. It has a customer rating of 5 "
         "out of 5 and serves English food at a price range of more than Value A.",
         "(0, 1)"},
        {Case(K, {Val("Value A", "price range", "more than £30", "more than Value A", "£30")}),
         "more than Value A, Alimentum is a pub that provides Chinese food in the more than £30 price "
         "range. It is located in the city centre.",
         "(1, 1)"}};
    size_t wrong = 0;
    std::string got;
    for (const auto& f : fx) {
      const auto c = CheckCopy(f.h, f.output).Case();
      wrong += c != f.label;
      got += (got.empty() ? "" : " ") + c;
    }
    ok = wrong == 0;
    return std::to_string(fx.size()) + " fixtures, " + std::to_string(wrong) + " mismatches [" + got + "]";
  });

  Check("6b", "fuzzy copy cases accepted", [](bool& ok) {
    const auto e = Case(Dialect::kTriple, {Ent("Entity 1", "Delta_II")});
    const auto v = Case(Dialect::kKeyValue, {Val("Value B", "customer rating", "3 out of 5", "Value B out of 5", "3")});
    const bool ignore_case = CheckCopy(e, "entity 1 was launched.").a && CheckCopy(v, "rated value b out of 5.").a;
    const bool ordinal = CheckCopy(e, "The 1st Entity was launched.").a;
    const bool symbol = CheckCopy(v, "Its customer rating is B out of 5.").a;
    ok = ignore_case && ordinal && symbol;
    return std::string("case ") + (ignore_case ? "yes" : "no") + ", ordinal " + (ordinal ? "yes" : "no") +
           ", bare symbol " + (symbol ? "yes" : "no");
  });

  Check("6c", "hidden inputs never show a hidden original", [](bool& ok) {
    Rng rng(14);
    auto triples = DisjointTripleSamples(rng, 300, "h");
    // Shared subjects, so some subjects are hidden across several units.
    for (size_t i = 0; i < triples.size(); i += 3) {
      auto& s = triples[i];
      s.units[1] = DataUnit::Triple(s.units[0].subject(), s.units[1].predicate(), s.units[1].object());
      s.references = {SayTriples(s, Iota(s.size()))};
    }
    std::vector<HiddenSample> hidden = BuildHiddenTripleSet(triples);
    const size_t n_triple = hidden.size();
    std::vector<Sample> kv;
    const std::map<std::string, std::vector<std::string>> inventory{
        {"eat type", {"coffee shop", "pub", "restaurant"}},
        {"food", {"Chinese", "English", "Fast food", "French", "Indian", "Italian", "Japanese"}},
        {"price range", {"cheap", "high", "less than £20", "moderate", "more than £30", "£20-25"}},
        {"customer rating", {"1 out of 5", "3 out of 5", "5 out of 5", "average", "high", "low"}},
        {"area", {"city centre", "riverside"}},
        {"family friendly", {"no", "yes"}}};
    for (const auto& [a, vals] : inventory) {
      for (const auto& v : vals) kv.push_back(Abstract(a + v, {}));
      for (size_t i = 0; i < vals.size(); ++i) kv[kv.size() - vals.size() + i].units = {DataUnit::KeyValue(a, vals[i])};
    }
    KvHiddenConfig cfg;
    cfg.name = "The Vexor";
    const auto kv_hidden = BuildHiddenKvSet(BuildValueInventory(kv), cfg);
    hidden.insert(hidden.end(), kv_hidden.begin(), kv_hidden.end());
    size_t leaks = 0, entries = 0;
    for (const auto& h : hidden) {
      const std::string prompt = FoldCase(Linearize(h.base, h.dialect));
      for (const auto& e : h.hidden) {
        ++entries;
        for (const auto& form : {e.original, Spaced(e.original)}) {
          leaks += prompt.find(FoldCase(form)) != std::string::npos;
        }
      }
      AssertNothingLeaks(h);
    }
    ok = leaks == 0 && n_triple > 0 && kv_hidden.size() == 2268;
    return std::to_string(n_triple) + " triple and " + std::to_string(kv_hidden.size()) + " key-value inputs, " +
           std::to_string(entries) + " hidden entries, " + std::to_string(leaks) + " leaks";
  });
}

void MetricProperties() {
  Check("7a", "Chernoff symmetry, range, zero iff equal (1000 pairs)", [](bool& ok) {
    Rng rng(15);
    size_t bad = 0;
    double max_oracle = 0;
    for (size_t t = 0; t < kChernoffPairs; ++t) {
      const size_t k = 1 + rng.Below(12);
      std::vector<int64_t> p(k), q(k);
      for (auto& x : p) x = static_cast<int64_t>(rng.Below(6));
      for (auto& x : q) x = static_cast<int64_t>(rng.Below(6));
      p[rng.Below(k)] += 1;
      q[rng.Below(k)] += 1;
      if (t % 4 == 0) {
        const int64_t m = 1 + static_cast<int64_t>(rng.Below(3));
        for (size_t i = 0; i < k; ++i) q[i] = p[i] * m;
      }
      const double d = ChernoffDivergence(p, q);
      const double back = ChernoffDivergence(q, p);
      // Equal as distributions: p_i * |q| == q_i * |p| for all i.
      int64_t tp = 0, tq = 0;
      for (size_t i = 0; i < k; ++i) tp += p[i], tq += q[i];
      bool equal = true;
      for (size_t i = 0; i < k; ++i) equal = equal && p[i] * tq == q[i] * tp;
      std::map<std::string, double> mp, mq;
      for (size_t i = 0; i < k; ++i) {
        if (p[i]) mp[std::to_string(i)] = static_cast<double>(p[i]);
        if (q[i]) mq[std::to_string(i)] = static_cast<double>(q[i]);
      }
      max_oracle = std::max(max_oracle, std::abs(d - OracleChernoff(mp, mq)));
      bad += std::abs(d - back) > kChernoffTol || d < 0 || d > 1 || (equal ? d > kChernoffTol : d <= kChernoffTol);
    }
    ok = bad == 0 && max_oracle <= kChernoffTol;
    return std::to_string(kChernoffPairs) + " pairs, " + std::to_string(bad) + " violations, max |D - oracle| " +
           Fmt(max_oracle, 15);
  });

  Check("7b", "paired bootstrap: identical -> 1.0, constant margin -> p < 0.05", [](bool& ok) {
    Rng rng(16);
    ScoreVector a, b, c;
    for (int i = 0; i < 100; ++i) {
      const double s = static_cast<double>(rng.Below(1000)) / 1000.0;
      a.scores.push_back(s);
      b.scores.push_back(s);
      c.scores.push_back(s + 0.05);
    }
    const double same = PairedBootstrap(a, b, kBootstrapResamples, 1);
    const double margin = PairedBootstrap(a, c, kBootstrapResamples, 1);
    ok = same == 1.0 && margin < kBootstrapAlpha;
    return "identical p = " + Fmt(same) + ", margin p = " + Fmt(margin);
  });

  Check("7c", "PARENT: empty -> 0, perfect copy -> 1", [](bool& ok) {
    const std::vector<DataUnit> table{DataUnit::KeyValue("area", "riverside"), DataUnit::KeyValue("food", "Chinese")};
    const std::string text = "a chinese place in the riverside area";
    const double empty = ParentScore("", {text}, table);
    const double copy = ParentScore(text, {text}, table);
    ok = empty == 0.0 && std::abs(copy - 1.0) <= kParentTol;
    return "empty " + Fmt(empty, 12) + ", perfect copy " + Fmt(copy, 12);
  });
}

// --- end-to-end smoke ---------------------------------------------------------

class EchoServer {
 public:
  EchoServer() {
    server_.Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
      const Json body = Json::parse(req.body);
      res.set_content(DumpJson(Json{{"text", body.at("prompt")}}), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~EchoServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// Shared-entity triple corpus: 80 train, 20 test.
void WriteSmokeSources(const fs::path& dir) {
  Rng rng(17);
  const auto words = PseudoWords(rng, 30);
  std::vector<DataUnit> pool;
  for (size_t i = 0; i < 40; ++i) {
    const size_t s = rng.Below(words.size());
    size_t o = rng.Below(words.size());
    while (o == s) o = rng.Below(words.size());
    pool.push_back(DataUnit::Triple(words[s], kPredicates[i % kPredicates.size()], words[o]));
  }
  auto make = [&](const std::string& id, size_t k) {
    Sample s;
    s.id = id;
    for (size_t i : rng.Permutation(pool.size())) {
      if (s.units.size() == k) break;
      s.units.push_back(pool[i]);
    }
    s.references = {SayTriples(s, rng.Permutation(s.size())), SayTriples(s, Iota(s.size()))};
    s.domain = "Synthetic";
    return s;
  };
  std::vector<Sample> train, test;
  for (size_t i = 0; i < 40; ++i) {
    Sample s;
    s.id = Id("train", i);
    s.units = {pool[i]};
    if (i % 2) s.units.push_back(pool[(i + 7) % pool.size()]);
    s.references = {SayTriples(s, Iota(s.size()))};
    s.domain = "Synthetic";
    train.push_back(std::move(s));
  }
  for (size_t i = 40; i < 80; ++i) train.push_back(make(Id("train", i), 2 + rng.Below(5)));
  for (size_t i = 0; i < kSmokeSamples - 80; ++i) test.push_back(make(Id("test", i), 2 + rng.Below(5)));
  fs::create_directories(dir);
  WriteSamples(dir / "train.jsonl", train);
  WriteSamples(dir / "test.jsonl", test);
}

std::string Quote(const std::string& s) { return "'" + s + "'"; }

bool RunPipeline(const std::string& cli, const fs::path& dir, const std::string& url, std::string& why) {
  fs::remove_all(dir);
  WriteSmokeSources(dir / "src");
  const std::vector<std::string> steps{
      "ingest --dialect triple --train src/train.jsonl --test src/test.jsonl --out corpus",
      "build systematicity --corpus corpus --seed 7 --restarts 5 --out sys",
      "build productivity --corpus corpus --N 3 --seed 7 --out prod",
      "build order --corpus corpus --variant match --seed 7 --out order",
      "build rules --corpus corpus --out rules",
      "align --corpus corpus --text-field references --out align.jsonl",
      "generate --requests sys/requests.jsonl --out pred/sys.jsonl --endpoint " + url,
      "generate --requests prod/N3/requests.jsonl --out pred/prod.jsonl --endpoint " + url,
      "generate --requests order/requests.jsonl --out pred/order.jsonl --endpoint " + url,
      "generate --requests rules/requests.jsonl --out pred/rules.jsonl --endpoint " + url,
      "eval systematicity --test sys/test.jsonl --pred-a pred/sys.jsonl --pred-b pred/sys.jsonl "
      "--resamples 2000 --report reports",
      "eval productivity --test prod/N3/test.jsonl --pred-a pred/prod.jsonl --pred-b pred/prod.jsonl "
      "--resamples 2000 --report reports",
      "eval order --pairs order/pairs.jsonl --pred pred/order.jsonl --test order/test.jsonl --report reports",
      "eval rules --hidden rules/hidden.jsonl --pred pred/rules.jsonl --report reports",
      "report --reports reports"};
  for (const auto& step : steps) {
    const std::string cmd = "cd " + Quote(dir.string()) + " && " + Quote(cli) + " " + step + " >> log.txt 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      why = "step failed: spor " + step.substr(0, step.find(" --")) + " (see " + (dir / "log.txt").string() + ")";
      return false;
    }
  }
  return true;
}

// Every file except the console log, relative path -> contents.
std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "log.txt") continue;
    out[fs::relative(e.path(), dir).generic_string()] = ReadFile(e.path());
  }
  return out;
}

void Smoke(const std::string& cli, const fs::path& work) {
  if (cli.empty()) {
    Skip("8", "end-to-end smoke", "no --cli given");
    return;
  }
  Check("8", "end-to-end smoke through the CLI with an echo endpoint", [&](bool& ok) {
    EchoServer server;
    std::string why;
    const auto t0 = std::chrono::steady_clock::now();
    if (!RunPipeline(cli, work / "run1", server.url(), why)) {
      ok = false;
      return why;
    }
    const double secs = Seconds(t0);
    if (!RunPipeline(cli, work / "run2", server.url(), why)) {
      ok = false;
      return "rerun: " + why;
    }
    const fs::path reports = work / "run1" / "reports";
    size_t with_hash = 0;
    for (const std::string aspect : {"systematicity", "productivity", "order", "rules"}) {
      const fs::path j = reports / (aspect + "_report.json");
      if (!fs::exists(j) || !fs::exists(reports / (aspect + "_report.txt"))) {
        ok = false;
        return "missing report files for " + aspect;
      }
      const Json r = Json::parse(ReadFile(j));
      with_hash += r.at("config_hash").get<std::string>() == Fnv1a64(r.at("config").dump());
    }
    const auto a = Snapshot(work / "run1"), b = Snapshot(work / "run2");
    size_t differing = 0;
    for (const auto& [k, v] : a) differing += !b.contains(k) || b.at(k) != v;
    differing += a.size() != b.size();
    const Json sys = Json::parse(ReadFile(reports / "systematicity_report.json"));
    const Json rules = Json::parse(ReadFile(reports / "rules_report.json"));
    const size_t n_test = sys.at("results").at("n_samples").get<size_t>();
    ok = secs < kSmokeSeconds && with_hash == 4 && differing == 0 && fs::exists(reports / "summary.txt") &&
         n_test > 0 && rules.at("results").at("n_samples").get<size_t>() > 0;
    return "first run " + Fmt(secs, 2) + " s, " + std::to_string(with_hash) + "/4 reports with matching config hash, " +
           std::to_string(a.size()) + " files, " + std::to_string(differing) + " differ on rerun, " +
           std::to_string(n_test) + " systematicity test samples";
  });
}

// --- real corpora ---------------------------------------------------------------

std::optional<fs::path> EnvDir(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return fs::path(v);
}

void CorpusChecks(const std::string& tag, const Corpus& corpus,
                  const std::optional<std::set<std::string>>& domains,
                  const std::vector<double>& prod_targets, std::optional<double> sys_target) {
  Check("1", "systematicity invariants on " + tag, [&](bool& ok) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto split = BestOfRestarts(corpus, {20, 0, kDivergenceLimit, AtomicityGuard::kStrict});
    const double secs = Seconds(t0);
    const auto r = CheckSystematicity(split);
    ok = r.ok && secs < kCorpusSeconds;
    std::string detail = std::to_string(r.test) + " test samples, divergence " + Fmt(r.divergence, 6) + ", " +
                         Fmt(secs, 1) + " s" + (r.ok ? "" : "; " + r.why);
    if (sys_target) {
      Report("2", "systematicity test size on " + tag + " within 15% of 2,360",
             Within(static_cast<double>(r.test), *sys_target, kSystematicityBand), std::to_string(r.test));
    }
    return detail;
  });
  Check("3", "productivity on " + tag, [&](bool& ok) {
    std::string detail;
    for (size_t i = 0; i < 3; ++i) {
      const size_t n = 3 + i;
      const auto split = BuildProductivitySplit(corpus, n, kDivergenceLimit, 0, domains);
      const auto r = CheckProductivity(split, n);
      bool filtered = true;
      if (domains) {
        for (const auto* set : {&split.invisible.samples, &split.visible.samples, &split.test.samples}) {
          for (const auto& s : *set) filtered = filtered && s.domain && domains->contains(*s.domain);
        }
      }
      const bool size_ok = Within(static_cast<double>(r.test), prod_targets[i], kSizeBand);
      ok = ok && r.ok && filtered && size_ok;
      detail += (detail.empty() ? "" : "; ") + std::string("N=") + std::to_string(n) + " test " +
                std::to_string(r.test) + " (target " + Fmt(prod_targets[i], 0) + "), divergence " +
                Fmt(r.divergence, 6) + (r.ok ? "" : " " + r.why) + (filtered ? "" : " domain filter broken");
    }
    return detail;
  });
}

void WebNlgChecks() {
  const auto dir = EnvDir("SPOR_WEBNLG_DIR");
  if (!dir) {
    for (const char* id : {"1", "2", "3", "4b", "6d"}) Skip(id, "WebNLG+ statistics", "SPOR_WEBNLG_DIR not set");
    return;
  }
  Corpus corpus;
  try {
    corpus = LoadCorpus(Dialect::kTriple, *dir / "train", *dir / "test", {});
  } catch (const std::exception& e) {
    Report("1", "load WebNLG+", false, e.what());
    return;
  }
  CorpusChecks("WebNLG+", corpus, std::set<std::string>{"Astronaut", "Monument", "University", "Company"},
               {219, 153, 99}, kSystematicityTarget);
  Check("4b", "boundary fraction on WebNLG+ references", [&](bool& ok) {
    size_t entities = 0, boundary = 0;
    for (const auto* set : {&corpus.train, &corpus.test}) {
      for (const auto& s : *set) {
        for (const auto& ref : s.references) {
          const auto o = Align(s, ref);
          entities += o.positions.size();
          boundary += o.boundary_count;
        }
      }
    }
    const double f = entities ? static_cast<double>(boundary) / entities : 0;
    ok = entities > 0 && f <= kBoundaryLimit;
    return Fmt(100 * f, 2) + "% of " + std::to_string(entities) + " entity positions";
  });
  Check("6d", "WebNLG+ hidden set within 10% of 1,614", [&](bool& ok) {
    const auto hidden = BuildHiddenTripleSet(corpus.test);
    ok = Within(static_cast<double>(hidden.size()), kHiddenTripleTarget, kSizeBand);
    return std::to_string(hidden.size()) + " samples";
  });
}

void E2eChecks() {
  const auto dir = EnvDir("SPOR_E2E_DIR");
  if (!dir) {
    for (const char* id : {"1", "3"}) Skip(id, "E2E statistics", "SPOR_E2E_DIR not set");
    return;
  }
  Corpus corpus;
  try {
    LoadOptions opt;
    opt.lexicon = LoadLexicon(fs::path(SPOR_CONFIG_DIR) / "e2e_lexicon.json");
    corpus = LoadCorpus(Dialect::kKeyValue, *dir / "trainset.csv", *dir / "testset_w_refs.csv", opt);
  } catch (const std::exception& e) {
    Report("1", "load E2E", false, e.what());
    return;
  }
  CorpusChecks("E2E", corpus, std::nullopt, {1314, 1002, 477}, std::nullopt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli, work = "acceptance_work";
  app.add_option("--cli", cli, "path to the spor binary (for the end-to-end smoke)");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  SyntheticSystematicity();
  SyntheticProductivity();
  AlignmentFixture();
  OrderBookkeeping();
  RuleFixtures();
  MetricProperties();
  Smoke(cli.empty() ? cli : fs::absolute(cli).string(), fs::absolute(work));
  WebNlgChecks();
  E2eChecks();

  std::printf("%s: %d failing\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
