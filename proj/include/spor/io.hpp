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

// Canonical corpus files: one JSON record per line with sorted keys.
//
//   {"domain":?, "id":..., "name":?{"attribute","value"},
//    "references":[...], "units":[{"kind":"triple","subject","predicate",
//    "object"} | {"kind":"kv","attribute","value"}]}
//
// A corpus directory holds corpus.json (dialect), train.jsonl, test.jsonl.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spor/core.hpp"

namespace spor {

using Json = nlohmann::json;

inline std::string DumpJson(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

inline std::string DumpJsonPretty(const Json& j) {
  return j.dump(2, ' ', false, Json::error_handler_t::replace);
}

inline Json UnitToJson(const DataUnit& u) {
  if (u.is_triple()) {
    return Json{{"kind", "triple"},
                {"subject", u.subject()},
                {"predicate", u.predicate()},
                {"object", u.object()}};
  }
  return Json{{"kind", "kv"}, {"attribute", u.attribute()}, {"value", u.value()}};
}

inline DataUnit UnitFromJson(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "triple") {
    return DataUnit::Triple(j.at("subject").get<std::string>(),
                            j.at("predicate").get<std::string>(),
                            j.at("object").get<std::string>());
  }
  if (kind == "kv") {
    return DataUnit::KeyValue(j.at("attribute").get<std::string>(),
                              j.at("value").get<std::string>());
  }
  throw Error(ErrorKind::kParseError, "unknown unit kind '" + kind + "'");
}

inline Json SampleToJson(const Sample& s) {
  Json units = Json::array();
  for (const auto& u : s.units) units.push_back(UnitToJson(u));
  Json j{{"id", s.id}, {"units", units}, {"references", s.references}};
  if (s.domain) j["domain"] = *s.domain;
  if (s.name_unit) {
    j["name"] = Json{{"attribute", s.name_unit->attribute()},
                     {"value", s.name_unit->value()}};
  }
  return j;
}

inline Sample SampleFromJson(const Json& j) {
  Sample s;
  s.id = j.at("id").get<std::string>();
  if (j.contains("domain") && !j["domain"].is_null()) {
    s.domain = j["domain"].get<std::string>();
  }
  for (const auto& u : j.at("units")) s.units.push_back(UnitFromJson(u));
  s.references = j.at("references").get<std::vector<std::string>>();
  if (j.contains("name") && !j["name"].is_null()) {
    s.name_unit = DataUnit::KeyValue(j["name"].at("attribute").get<std::string>(),
                                     j["name"].at("value").get<std::string>());
  }
  s.Validate();
  return s;
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::filesystem::path& path, const std::string& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << data;
}

// Parses every non-blank line as JSON. Errors carry the 1-based line number.
inline std::vector<Json> ReadJsonLines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<Json> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kParseError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void WriteJsonLines(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::string data;
  for (const auto& r : records) {
    data += DumpJson(r);
    data.push_back('\n');
  }
  WriteFile(path, data);
}

inline std::vector<Sample> ReadSamples(const std::filesystem::path& path) {
  std::vector<Sample> out;
  size_t line_no = 0;
  for (const auto& j : ReadJsonLines(path)) {
    ++line_no;
    try {
      out.push_back(SampleFromJson(j));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kParseError,
                  path.string() + ": record " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void WriteSamples(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::vector<Json> records;
  records.reserve(samples.size());
  for (const auto& s : samples) records.push_back(SampleToJson(s));
  WriteJsonLines(path, records);
}

inline void WriteCorpusDir(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  WriteSamples(dir / "train.jsonl", corpus.train);
  WriteSamples(dir / "test.jsonl", corpus.test);
  WriteFile(dir / "corpus.json", DumpJsonPretty(Json{{"dialect", DialectName(corpus.dialect)}}) + "\n");
}

inline Corpus ReadCorpusDir(const std::filesystem::path& dir) {
  Corpus c;
  const Json meta = Json::parse(ReadFile(dir / "corpus.json"));
  c.dialect = ParseDialect(meta.at("dialect").get<std::string>());
  c.train = ReadSamples(dir / "train.jsonl");
  c.test = ReadSamples(dir / "test.jsonl");
  c.RebuildVocabulary();
  return c;
}

// 64-bit FNV-1a, hex encoded. Used to fingerprint artifacts in reports.
inline std::string Fnv1aHex(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

inline std::string HashFile(const std::filesystem::path& path) {
  return Fnv1aHex(ReadFile(path));
}

// <name>.jsonl plus a <name>.meta.json sidecar with the split metadata.
inline void WriteArtifact(const std::filesystem::path& dir, const SplitArtifact& a) {
  std::filesystem::create_directories(dir);
  WriteSamples(dir / (a.name + ".jsonl"), a.samples);
  Json meta{{"aspect", AspectName(a.aspect)}, {"name", a.name}, {"samples", a.samples.size()},
            {"metadata", a.metadata}};
  WriteFile(dir / (a.name + ".meta.json"), DumpJsonPretty(meta) + "\n");
}

}  // namespace spor
