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

// Hidden-information inputs and the (a, b) copy check.
//
// a: every phrase that hides information is copied (case ignored, ordinal
//    numerals accepted, and the bare symbol accepted without "Entity" /
//    "Value").
// b: a hidden entity surfaces, or for key-value inputs one of the attribute's
//    numeric-bearing values.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spor/alignment.hpp"
#include "spor/core.hpp"
#include "spor/io.hpp"
#include "spor/text.hpp"

namespace spor {

struct HiddenEntry {
  std::string label;     // "Entity 1" or "Value A"
  std::string original;  // hidden entity, or the full original value
  std::optional<std::string> attribute;
  std::string phrase;    // what the input shows: the label, or the substituted value
  std::string hidden_token;  // the replaced numeric run (key-value only)
  std::vector<std::string> alternatives;  // numeric-bearing values of the attribute
};

struct HiddenSample {
  Sample base;
  std::vector<HiddenEntry> hidden;
  Dialect dialect = Dialect::kTriple;
};

inline Json HiddenSampleToJson(const HiddenSample& h) {
  Json hidden = Json::array();
  for (const auto& e : h.hidden) {
    Json j{{"label", e.label}, {"original", e.original}, {"phrase", e.phrase}};
    if (e.attribute) j["attribute"] = *e.attribute;
    if (!e.hidden_token.empty()) j["hidden_token"] = e.hidden_token;
    if (!e.alternatives.empty()) j["alternatives"] = e.alternatives;
    hidden.push_back(std::move(j));
  }
  return Json{{"sample", SampleToJson(h.base)},
              {"hidden", hidden},
              {"dialect", DialectName(h.dialect)}};
}

inline HiddenSample HiddenSampleFromJson(const Json& j) {
  try {
    HiddenSample h;
    h.base = SampleFromJson(j.at("sample"));
    h.dialect = ParseDialect(j.at("dialect").get<std::string>());
    for (const auto& e : j.at("hidden")) {
      HiddenEntry entry;
      entry.label = e.at("label").get<std::string>();
      entry.original = e.at("original").get<std::string>();
      entry.phrase = e.value("phrase", entry.label);
      if (e.contains("attribute")) entry.attribute = e.at("attribute").get<std::string>();
      entry.hidden_token = e.value("hidden_token", std::string());
      if (e.contains("alternatives")) {
        entry.alternatives = e.at("alternatives").get<std::vector<std::string>>();
      }
      h.hidden.push_back(std::move(entry));
    }
    return h;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad hidden sample: ") + e.what());
  }
}

inline std::vector<std::string> InputStrings(const Sample& s) {
  std::vector<std::string> out;
  if (s.name_unit) out.push_back(s.name_unit->value());
  for (const auto& u : s.units) {
    for (const auto& f : u.fields()) out.push_back(f);
  }
  return out;
}

// Throws VerificationFailure if a hidden original is still visible.
inline void AssertNothingLeaks(const HiddenSample& h) {
  for (const auto& field : InputStrings(h.base)) {
    for (const auto& e : h.hidden) {
      if (ContainsNormalized(field, e.original)) {
        throw Error(ErrorKind::kVerificationFailure,
                    "hidden '" + e.original + "' visible in sample " + h.base.id);
      }
    }
  }
}

// --- triple inputs --------------------------------------------------------

inline std::optional<HiddenSample> HideTripleSample(const Sample& s) {
  const auto entities = SampleEntities(s);
  std::set<std::string> subjects;
  for (const auto& u : s.units) subjects.insert(u.subject());

  std::set<std::string> chosen;
  for (const auto& e : entities) {
    if (!subjects.contains(e) || s.references.empty()) continue;
    const std::string surface = UnderscoresToSpaces(e);
    const bool everywhere = std::all_of(s.references.begin(), s.references.end(),
                                        [&](const std::string& r) { return ContainsNormalized(r, surface); });
    if (everywhere) chosen.insert(e);
  }

  // An entity whose string survives inside some other visible field cannot
  // be hidden; dropping one may expose another, so iterate.
  for (bool changed = true; changed && !chosen.empty();) {
    changed = false;
    for (auto it = chosen.begin(); it != chosen.end();) {
      bool leaks = false;
      for (const auto& u : s.units) {
        for (const auto* f : {&u.subject(), &u.predicate(), &u.object()}) {
          if (chosen.contains(*f)) continue;
          if (ContainsNormalized(*f, *it)) leaks = true;
        }
      }
      if (leaks) {
        it = chosen.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  if (chosen.empty()) return std::nullopt;

  HiddenSample h;
  h.dialect = Dialect::kTriple;
  std::map<std::string, std::string> label;
  for (const auto& e : entities) {
    if (!chosen.contains(e)) continue;
    const std::string l = "Entity " + std::to_string(label.size() + 1);
    label[e] = l;
    h.hidden.push_back({l, e, std::nullopt, l, "", {}});
  }
  h.base.id = s.id;
  h.base.domain = s.domain;
  for (const auto& u : s.units) {
    auto sub = [&](const std::string& x) {
      auto it = label.find(x);
      return it == label.end() ? x : it->second;
    };
    h.base.units.push_back(DataUnit::Triple(sub(u.subject()), u.predicate(), sub(u.object())));
  }
  return h;
}

inline std::vector<HiddenSample> BuildHiddenTripleSet(const std::vector<Sample>& test) {
  std::vector<HiddenSample> out;
  for (const auto& s : test) {
    auto h = HideTripleSample(s);
    if (!h) continue;
    AssertNothingLeaks(*h);
    out.push_back(std::move(*h));
  }
  return out;
}

// --- key-value inputs -----------------------------------------------------

struct NumericRun {
  size_t begin = 0;
  size_t end = 0;
};

// First maximal digit run (optional decimal part) with an attached currency
// symbol directly in front.
inline std::optional<NumericRun> FirstNumericRun(std::string_view v) {
  static const std::vector<std::string> kCurrency = {"£", "$", "€"};
  auto digit = [&](size_t i) { return i < v.size() && v[i] >= '0' && v[i] <= '9'; };
  for (size_t i = 0; i < v.size(); ++i) {
    if (!digit(i)) continue;
    size_t end = i;
    while (digit(end)) ++end;
    if (end + 1 < v.size() && v[end] == '.' && digit(end + 1)) {
      ++end;
      while (digit(end)) ++end;
    }
    size_t begin = i;
    for (const auto& c : kCurrency) {
      if (begin >= c.size() && v.substr(begin - c.size(), c.size()) == c) {
        begin -= c.size();
        break;
      }
    }
    return NumericRun{begin, end};
  }
  return std::nullopt;
}

inline bool HasNumeric(std::string_view v) { return FirstNumericRun(v).has_value(); }

using ValueInventory = std::map<std::string, std::vector<std::string>>;

// Distinct values per attribute over a corpus, sorted.
inline ValueInventory BuildValueInventory(const std::vector<Sample>& samples) {
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& s : samples) {
    for (const auto& u : s.units) {
      if (!u.is_triple()) seen[u.attribute()].insert(u.value());
    }
  }
  ValueInventory out;
  for (auto& [a, vs] : seen) out[a].assign(vs.begin(), vs.end());
  return out;
}

inline std::string MostFrequentName(const std::vector<Sample>& samples) {
  std::map<std::string, size_t> counts;
  for (const auto& s : samples) {
    if (s.name_unit) ++counts[s.name_unit->value()];
  }
  std::string best;
  size_t n = 0;
  for (const auto& [name, c] : counts) {
    if (c > n) {
      best = name;
      n = c;
    }
  }
  return best;
}

struct KvHiddenConfig {
  std::vector<std::string> attributes = {"eat type",        "food", "price range",
                                         "customer rating", "area", "family friendly"};
  std::string name;  // rendered as name[...]; empty omits it
  std::optional<std::string> near;  // attached as near[...] when set
  size_t limit = 0;  // 0 keeps every assignment
};

// Full cross product over the configured attributes (one value each), kept
// when at least one chosen value carries a number. The first numeric run of
// each such value becomes "Value A", "Value B", ... in attribute order.
inline std::vector<HiddenSample> BuildHiddenKvSet(const ValueInventory& inventory,
                                                  const KvHiddenConfig& config) {
  std::vector<std::string> attrs;
  for (const auto& a : config.attributes) {
    auto it = inventory.find(a);
    if (it != inventory.end() && !it->second.empty()) attrs.push_back(a);
  }
  if (attrs.empty()) throw Error(ErrorKind::kEmptyInventory, "no attribute values to enumerate");

  std::map<std::string, std::vector<std::string>> numeric_values;
  for (const auto& a : attrs) {
    for (const auto& v : inventory.at(a)) {
      if (HasNumeric(v)) numeric_values[a].push_back(v);
    }
  }

  std::vector<HiddenSample> out;
  std::vector<size_t> pick(attrs.size(), 0);
  size_t counter = 0;
  for (;;) {
    bool any_numeric = false;
    for (size_t i = 0; i < attrs.size(); ++i) any_numeric |= HasNumeric(inventory.at(attrs[i])[pick[i]]);
    if (any_numeric) {
      HiddenSample h;
      h.dialect = Dialect::kKeyValue;
      char letter = 'A';
      for (size_t i = 0; i < attrs.size(); ++i) {
        const std::string& v = inventory.at(attrs[i])[pick[i]];
        auto run = FirstNumericRun(v);
        if (!run) {
          h.base.units.push_back(DataUnit::KeyValue(attrs[i], v));
          continue;
        }
        const std::string label = std::string("Value ") + letter++;
        const std::string phrase = v.substr(0, run->begin) + label + v.substr(run->end);
        h.base.units.push_back(DataUnit::KeyValue(attrs[i], phrase));
        h.hidden.push_back({label, v, attrs[i], phrase, v.substr(run->begin, run->end - run->begin),
                            numeric_values[attrs[i]]});
      }
      if (config.near) h.base.units.push_back(DataUnit::KeyValue("near", *config.near));
      if (!config.name.empty()) h.base.name_unit = DataUnit::KeyValue("name", config.name);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "kv-hidden-%05zu", ++counter);
      h.base.id = buf;
      AssertNothingLeaks(h);
      out.push_back(std::move(h));
      if (config.limit != 0 && out.size() >= config.limit) return out;
    }
    size_t i = attrs.size();
    while (i > 0) {
      --i;
      if (++pick[i] < inventory.at(attrs[i]).size()) break;
      pick[i] = 0;
      if (i == 0) return out;
    }
  }
}

// --- copy check -----------------------------------------------------------

inline std::string OrdinalOf(const std::string& number) {
  if (number.empty()) return number;
  const int last = number.back() - '0';
  const int tens = number.size() > 1 ? number[number.size() - 2] - '0' : 0;
  std::string suffix = "th";
  if (tens != 1) {
    if (last == 1) suffix = "st";
    if (last == 2) suffix = "nd";
    if (last == 3) suffix = "rd";
  }
  return number + suffix;
}

struct CopyCheckResult {
  bool a = false;
  bool b = false;
  std::vector<std::string> details;

  std::string Case() const {
    return std::string("(") + (a ? "1" : "0") + ", " + (b ? "1" : "0") + ")";
  }
};

namespace detail {

inline std::vector<std::string> PhraseTokens(std::string_view s) { return FoldTokens(Tokenize(s)); }

// Accepted surface variants of one hidden phrase.
inline std::vector<std::vector<std::string>> CopyVariants(const HiddenEntry& e) {
  const auto label_tokens = PhraseTokens(e.label);  // {"entity","1"} / {"value","a"}
  std::vector<std::vector<std::string>> out;
  const auto phrase = PhraseTokens(e.phrase);
  out.push_back(phrase);

  // Locate the label inside the phrase and build the ordinal and bare forms.
  const long at = FindTokenRun(phrase, label_tokens);
  if (at < 0 || label_tokens.size() != 2) return out;
  const auto pos = static_cast<size_t>(at);
  const std::string& word = label_tokens[0];
  const std::string& symbol = label_tokens[1];
  auto with = [&](std::vector<std::string> middle) {
    std::vector<std::string> v(phrase.begin(), phrase.begin() + static_cast<long>(pos));
    v.insert(v.end(), middle.begin(), middle.end());
    v.insert(v.end(), phrase.begin() + static_cast<long>(pos + 2), phrase.end());
    return v;
  };
  out.push_back(with({symbol}));
  const bool numeric = std::all_of(symbol.begin(), symbol.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (numeric) {
    const std::string ord = OrdinalOf(symbol);
    out.push_back(with({ord, word}));
    out.push_back(with({word, ord}));
    out.push_back(with({ord}));
  }
  return out;
}

}  // namespace detail

inline CopyCheckResult CheckCopy(const HiddenSample& h, std::string_view output) {
  CopyCheckResult r;
  const auto tokens = detail::PhraseTokens(output);
  r.a = true;
  for (const auto& e : h.hidden) {
    bool copied = false;
    for (const auto& v : detail::CopyVariants(e)) {
      if (FindTokenRun(tokens, v) >= 0) {
        copied = true;
        break;
      }
    }
    if (!copied) {
      r.a = false;
      r.details.push_back("missing: " + e.phrase);
    }

    if (h.dialect == Dialect::kTriple) {
      if (ContainsNormalized(output, UnderscoresToSpaces(e.original))) {
        r.b = true;
        r.details.push_back("surfaced: " + e.original);
      }
      continue;
    }
    std::vector<std::string> watch = e.alternatives;
    if (std::find(watch.begin(), watch.end(), e.original) == watch.end()) watch.push_back(e.original);
    // A bare currency amount is specific enough to check on its own.
    if (!e.hidden_token.empty() && !(e.hidden_token.front() >= '0' && e.hidden_token.front() <= '9')) {
      watch.push_back(e.hidden_token);
    }
    for (const auto& w : watch) {
      if (ContainsPhrase(output, w)) {
        r.b = true;
        r.details.push_back("surfaced: " + w);
        break;
      }
    }
  }
  return r;
}

struct RuleReport {
  size_t counts[2][2] = {{0, 0}, {0, 0}};
  size_t total = 0;

  double Pct(bool a, bool b) const {
    return 100.0 * static_cast<double>(counts[a][b]) / static_cast<double>(total);
  }
};

inline RuleReport AggregateRuleReport(const std::vector<CopyCheckResult>& results) {
  if (results.empty()) throw Error(ErrorKind::kEmptyResults, "no copy-check results");
  RuleReport r;
  for (const auto& c : results) ++r.counts[c.a][c.b];
  r.total = results.size();
  return r;
}

}  // namespace spor
