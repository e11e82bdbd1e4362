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

// Canonical data model shared by the split builders and the evaluators.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spor {

enum class ErrorKind {
  kInvalidUnit,
  kParseError,
  kEmptyCorpus,
  kDegenerateDistribution,
  kVerificationFailure,
  kItemMismatch,
  kTooFewItems,
  kUndefinedScore,
  kPairingError,
  kInvalidParameter,
  kMissingPrediction,
  kEmptyInventory,
  kEmptyResults,
  kGenerationError,
  kProtocolError,
  kIo,
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidUnit: return "InvalidUnit";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorKind::kVerificationFailure: return "VerificationFailure";
    case ErrorKind::kItemMismatch: return "ItemMismatch";
    case ErrorKind::kTooFewItems: return "TooFewItems";
    case ErrorKind::kUndefinedScore: return "UndefinedScore";
    case ErrorKind::kPairingError: return "PairingError";
    case ErrorKind::kInvalidParameter: return "InvalidParameter";
    case ErrorKind::kMissingPrediction: return "MissingPrediction";
    case ErrorKind::kEmptyInventory: return "EmptyInventory";
    case ErrorKind::kEmptyResults: return "EmptyResults";
    case ErrorKind::kGenerationError: return "GenerationError";
    case ErrorKind::kProtocolError: return "ProtocolError";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

// All toolkit failures surface as spor::Error; kind() identifies the
// contract violation.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string Trim(std::string_view s) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

enum class UnitKind { kTriple, kKeyValue };

// One triple <s, p, o> or one attribute-value pair. Fields are trimmed on
// construction; case is preserved.
class DataUnit {
 public:
  static DataUnit Triple(std::string_view subject, std::string_view predicate,
                         std::string_view object) {
    DataUnit u(UnitKind::kTriple, {Trim(subject), Trim(predicate), Trim(object)});
    return u;
  }

  static DataUnit KeyValue(std::string_view attribute, std::string_view value) {
    DataUnit u(UnitKind::kKeyValue, {Trim(attribute), Trim(value)});
    return u;
  }

  UnitKind kind() const { return kind_; }
  bool is_triple() const { return kind_ == UnitKind::kTriple; }

  const std::string& subject() const { return field(0, UnitKind::kTriple); }
  const std::string& predicate() const { return field(1, UnitKind::kTriple); }
  const std::string& object() const { return field(2, UnitKind::kTriple); }
  const std::string& attribute() const { return field(0, UnitKind::kKeyValue); }
  const std::string& value() const { return field(1, UnitKind::kKeyValue); }

  const std::vector<std::string>& fields() const { return fields_; }
  const std::string& id() const { return id_; }

  friend bool operator==(const DataUnit& a, const DataUnit& b) {
    return a.id_ == b.id_;
  }

 private:
  DataUnit(UnitKind kind, std::vector<std::string> fields)
      : kind_(kind), fields_(std::move(fields)) {
    for (const auto& f : fields_) {
      if (f.empty()) {
        throw Error(ErrorKind::kInvalidUnit,
                    std::string("empty required field in ") +
                        (kind_ == UnitKind::kTriple ? "triple" : "key-value") +
                        " unit");
      }
    }
    id_ = BuildId();
  }

  const std::string& field(size_t i, UnitKind expected) const {
    if (kind_ != expected) {
      throw Error(ErrorKind::kInvalidUnit, "field not defined for this unit kind");
    }
    return fields_[i];
  }

  // '|' separates fields; '\' and '|' inside a field are backslash-escaped so
  // the id is injective over field tuples.
  std::string BuildId() const {
    std::string out = kind_ == UnitKind::kTriple ? "T" : "K";
    for (const auto& f : fields_) {
      out.push_back('|');
      for (char c : f) {
        if (c == '|' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
    }
    return out;
  }

  UnitKind kind_;
  std::vector<std::string> fields_;
  std::string id_;
};

inline std::string CanonicalUnitId(const DataUnit& unit) { return unit.id(); }

// An ordered list of data units with its reference texts. Unit order is
// presentation only; the units form a set.
struct Sample {
  std::string id;
  std::optional<std::string> domain;
  std::vector<DataUnit> units;
  std::vector<std::string> references;
  // E2E restaurant name. It is rendered in prompts but is not a data unit.
  std::optional<DataUnit> name_unit;

  size_t size() const { return units.size(); }

  std::vector<std::string> UnitIds() const {
    std::vector<std::string> ids;
    ids.reserve(units.size());
    for (const auto& u : units) ids.push_back(u.id());
    return ids;
  }

  // Throws kInvalidUnit when the sample breaks the set or size invariants.
  void Validate() const {
    if (units.empty()) {
      throw Error(ErrorKind::kInvalidUnit, "sample " + id + " has no units");
    }
    std::set<std::string> seen;
    for (const auto& u : units) {
      if (!seen.insert(u.id()).second) {
        throw Error(ErrorKind::kInvalidUnit,
                    "sample " + id + " repeats unit " + u.id());
      }
    }
  }
};

enum class Dialect { kTriple, kKeyValue };

inline std::string DialectName(Dialect d) {
  return d == Dialect::kTriple ? "triple" : "kv";
}

inline Dialect ParseDialect(std::string_view s) {
  if (s == "triple") return Dialect::kTriple;
  if (s == "kv") return Dialect::kKeyValue;
  throw Error(ErrorKind::kInvalidParameter, "unknown dialect '" + std::string(s) + "'");
}

struct Corpus {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::set<std::string> unit_vocabulary;
  Dialect dialect = Dialect::kTriple;

  void RebuildVocabulary() {
    unit_vocabulary.clear();
    for (const auto& s : train) {
      for (const auto& u : s.units) unit_vocabulary.insert(u.id());
    }
  }
};

enum class Aspect { kSystematicity, kProductivity, kOrderInvariance, kRuleLearnability };

inline std::string AspectName(Aspect a) {
  switch (a) {
    case Aspect::kSystematicity: return "systematicity";
    case Aspect::kProductivity: return "productivity";
    case Aspect::kOrderInvariance: return "order";
    case Aspect::kRuleLearnability: return "rules";
  }
  return "unknown";
}

// A named constructed dataset. metadata carries every parameter and
// stochastic choice needed to rebuild it (seed, thresholds, restart index).
struct SplitArtifact {
  Aspect aspect = Aspect::kSystematicity;
  std::string name;
  std::vector<Sample> samples;
  std::map<std::string, std::string> metadata;
};

inline std::set<std::string> UnionOfUnitIds(const std::vector<Sample>& samples) {
  std::set<std::string> ids;
  for (const auto& s : samples) {
    for (const auto& u : s.units) ids.insert(u.id());
  }
  return ids;
}

// Dense integer view of unit sets used by the split builders.
class UnitIndex {
 public:
  int Intern(const std::string& id) {
    auto [it, inserted] = ids_.try_emplace(id, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(id);
    return it->second;
  }

  std::optional<int> Find(const std::string& id) const {
    auto it = ids_.find(id);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& Name(int i) const { return names_[static_cast<size_t>(i)]; }
  size_t size() const { return names_.size(); }

  // Sorted, deduplicated unit indices of a sample.
  std::vector<int> InternSample(const Sample& s) {
    std::vector<int> out;
    out.reserve(s.units.size());
    for (const auto& u : s.units) out.push_back(Intern(u.id()));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> names_;
};

// |a ∩ b| for sorted vectors.
inline size_t IntersectionSize(const std::vector<int>& a, const std::vector<int>& b) {
  size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace spor
