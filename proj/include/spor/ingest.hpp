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

// Source adapters and the corpus filters.
//
// Triple dialect: WebNLG benchmark XML (modifiedtripleset / English lex),
// WebNLG JSON, or canonical JSONL. Test samples using a unit unseen in train
// are dropped.
// Key-value dialect: E2E-style CSV (an MR column such as
// "name[X], eatType[pub]" plus a reference column; rows sharing an MR become
// one sample) or canonical JSONL. Samples are kept only when every value,
// name included, matches in every reference.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "spor/core.hpp"
#include "spor/io.hpp"
#include "spor/text.hpp"

namespace spor {

inline Lexicon LoadLexicon(const std::filesystem::path& path) {
  Lexicon lex;
  Json j;
  try {
    j = Json::parse(ReadFile(path));
    for (const auto& [attr, values] : j.items()) {
      for (const auto& [value, forms] : values.items()) {
        lex.forms[attr][value] = forms.get<std::vector<std::string>>();
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  return lex;
}

// --- CSV ------------------------------------------------------------------

// RFC 4180 records: quoted fields, doubled quotes, embedded newlines.
inline std::vector<std::vector<std::string>> ParseCsv(std::string_view data,
                                                      const std::string& source = "csv") {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  size_t line = 1, quote_line = 0;
  if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  for (size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (field_started) {
        throw Error(ErrorKind::kParseError,
                    source + ":" + std::to_string(line) + ": stray quote inside field");
      }
      quoted = true;
      field_started = true;
      quote_line = line;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      end_field();
      if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
      row.clear();
      ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) {
    throw Error(ErrorKind::kParseError,
                source + ":" + std::to_string(quote_line) + ": unterminated quoted field");
  }
  if (field_started || !row.empty()) {
    end_field();
    rows.push_back(std::move(row));
  }
  return rows;
}

// "eatType" -> "eat type", "customer rating" unchanged.
inline std::string SpacedLowerAttribute(std::string_view a) {
  std::string out;
  for (char c : Trim(a)) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

struct MrItem {
  std::string attribute;
  std::string value;
};

inline std::vector<MrItem> ParseMr(std::string_view mr) {
  std::vector<MrItem> items;
  size_t i = 0;
  while (i < mr.size()) {
    while (i < mr.size() && (mr[i] == ',' || IsAsciiSpace(mr[i]))) ++i;
    if (i >= mr.size()) break;
    const size_t open = mr.find('[', i);
    if (open == std::string_view::npos) {
      throw Error(ErrorKind::kParseError, "meaning representation item without '[': " + std::string(mr));
    }
    const size_t close = mr.find(']', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::kParseError, "unclosed '[' in meaning representation: " + std::string(mr));
    }
    items.push_back({std::string(mr.substr(i, open - i)), std::string(mr.substr(open + 1, close - open - 1))});
    i = close + 1;
  }
  return items;
}

struct CsvOptions {
  std::string mr_column = "mr";
  std::string ref_column = "ref";
};

inline std::vector<Sample> ReadKvCsv(const std::filesystem::path& path, const std::string& split,
                                     const CsvOptions& opt = {}) {
  const auto rows = ParseCsv(ReadFile(path), path.string());
  if (rows.empty()) return {};
  const auto& header = rows.front();
  auto col = [&](const std::string& name) -> size_t {
    for (size_t i = 0; i < header.size(); ++i) {
      if (Trim(header[i]) == name) return i;
    }
    throw Error(ErrorKind::kParseError, path.string() + ":1: missing column '" + name + "'");
  };
  const size_t mr_col = col(opt.mr_column);
  const size_t ref_col = col(opt.ref_column);

  std::vector<Sample> out;
  std::map<std::string, size_t> by_mr;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(mr_col, ref_col)) {
      throw Error(ErrorKind::kParseError,
                  path.string() + ": record " + std::to_string(r + 1) + ": too few columns");
    }
    const std::string mr = Trim(row[mr_col]);
    auto it = by_mr.find(mr);
    if (it != by_mr.end()) {
      out[it->second].references.push_back(Trim(row[ref_col]));
      continue;
    }
    Sample s;
    try {
      for (const auto& item : ParseMr(mr)) {
        const std::string attr = SpacedLowerAttribute(item.attribute);
        if (Trim(item.value).empty()) continue;
        if (attr == "name") {
          s.name_unit = DataUnit::KeyValue(attr, item.value);
        } else {
          const auto u = DataUnit::KeyValue(attr, item.value);
          if (std::none_of(s.units.begin(), s.units.end(), [&](const DataUnit& x) { return x == u; })) {
            s.units.push_back(u);
          }
        }
      }
    } catch (const Error& e) {
      throw Error(ErrorKind::kParseError,
                  path.string() + ": record " + std::to_string(r + 1) + ": " + e.what());
    }
    if (s.units.empty()) continue;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s-%06zu", split.c_str(), out.size() + 1);
    s.id = buf;
    s.references.push_back(Trim(row[ref_col]));
    by_mr.emplace(mr, out.size());
    out.push_back(std::move(s));
  }
  return out;
}

// --- WebNLG ---------------------------------------------------------------

inline std::optional<DataUnit> ParseTripleString(std::string_view t) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (;;) {
    const size_t bar = t.find(" | ", start);
    if (bar == std::string_view::npos) {
      parts.emplace_back(t.substr(start));
      break;
    }
    parts.emplace_back(t.substr(start, bar - start));
    start = bar + 3;
  }
  if (parts.size() != 3) return std::nullopt;
  return DataUnit::Triple(parts[0], parts[1], parts[2]);
}

inline void AddUnique(Sample& s, const DataUnit& u) {
  if (std::none_of(s.units.begin(), s.units.end(), [&](const DataUnit& x) { return x == u; })) {
    s.units.push_back(u);
  }
}

inline void ReadWebNlgXml(const std::filesystem::path& path, const std::string& split,
                          std::vector<Sample>& out) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(path.string(), tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::kParseError, path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const auto entries = tree.get_child_optional("benchmark.entries");
  if (!entries) throw Error(ErrorKind::kParseError, path.string() + ": no benchmark/entries element");
  for (const auto& [tag, entry] : *entries) {
    if (tag != "entry") continue;
    Sample s;
    if (auto cat = entry.get_optional<std::string>("<xmlattr>.category")) s.domain = *cat;
    if (auto mts = entry.get_child_optional("modifiedtripleset")) {
      for (const auto& [t, node] : *mts) {
        if (t != "mtriple") continue;
        auto u = ParseTripleString(Trim(node.data()));
        if (!u) {
          throw Error(ErrorKind::kParseError, path.string() + ": malformed triple '" + node.data() + "'");
        }
        AddUnique(s, *u);
      }
    }
    for (const auto& [t, node] : entry) {
      if (t != "lex") continue;
      const auto lang = node.get<std::string>("<xmlattr>.lang", "en");
      if (lang != "en") continue;
      const std::string text = Trim(node.data());
      if (!text.empty()) s.references.push_back(text);
    }
    if (s.units.empty()) continue;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s-%06zu", split.c_str(), out.size() + 1);
    s.id = buf;
    out.push_back(std::move(s));
  }
}

// {"entries": [{"<n>": {"category", "modifiedtripleset": [{"subject",
// "property", "object"}], "lexicalisations": [{"lex", "lang"?}]}}]}
inline void ReadWebNlgJson(const std::filesystem::path& path, const std::string& split,
                           std::vector<Sample>& out) {
  Json j;
  try {
    j = Json::parse(ReadFile(path));
    for (const auto& wrapper : j.at("entries")) {
      for (const auto& [key, entry] : wrapper.items()) {
        Sample s;
        if (entry.contains("category")) s.domain = entry["category"].get<std::string>();
        for (const auto& t : entry.at("modifiedtripleset")) {
          AddUnique(s, DataUnit::Triple(t.at("subject").get<std::string>(), t.at("property").get<std::string>(),
                                        t.at("object").get<std::string>()));
        }
        if (entry.contains("lexicalisations")) {
          for (const auto& l : entry["lexicalisations"]) {
            if (l.value("lang", std::string("en")) != "en") continue;
            const std::string text = Trim(l.at("lex").get<std::string>());
            if (!text.empty()) s.references.push_back(text);
          }
        }
        if (s.units.empty()) continue;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s-%06zu", split.c_str(), out.size() + 1);
        s.id = buf;
        out.push_back(std::move(s));
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
}

// A file, or a directory searched recursively in sorted path order.
inline std::vector<std::filesystem::path> ExpandSources(const std::filesystem::path& p) {
  namespace fs = std::filesystem;
  if (!fs::exists(p)) throw Error(ErrorKind::kIo, "no such file or directory: " + p.string());
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(p)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".xml" || ext == ".json" || ext == ".jsonl" || ext == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Sample> ReadSource(Dialect dialect, const std::filesystem::path& path,
                                      const std::string& split, const CsvOptions& csv = {}) {
  std::vector<Sample> out;
  for (const auto& f : ExpandSources(path)) {
    const auto ext = f.extension().string();
    if (ext == ".jsonl") {
      auto samples = ReadSamples(f);
      out.insert(out.end(), samples.begin(), samples.end());
    } else if (ext == ".xml") {
      ReadWebNlgXml(f, split, out);
    } else if (ext == ".json") {
      ReadWebNlgJson(f, split, out);
    } else if (ext == ".csv") {
      auto samples = ReadKvCsv(f, split, csv);
      out.insert(out.end(), samples.begin(), samples.end());
    } else {
      throw Error(ErrorKind::kParseError, "unsupported source file " + f.string());
    }
  }
  for (const auto& s : out) {
    const bool want_triple = dialect == Dialect::kTriple;
    const bool ok = std::all_of(s.units.begin(), s.units.end(),
                                [&](const DataUnit& u) { return u.is_triple() == want_triple; });
    if (!ok) {
      throw Error(ErrorKind::kParseError, "sample " + s.id + " does not match the declared dialect");
    }
  }
  return out;
}

// --- filters --------------------------------------------------------------

struct LoadOptions {
  bool filter = true;
  // Key-value dialect: drop only the references that miss a value instead of
  // the whole sample (a sample left without references is still dropped).
  bool keep_matching_references = false;
  Lexicon lexicon;
  CsvOptions csv;
};

// Case-insensitive substring match of the value or one of its lexicon forms.
inline bool ValueMatches(const DataUnit& u, std::string_view text, const Lexicon& lexicon) {
  const std::string folded = FoldCase(text);
  for (const auto& form : lexicon.SurfaceForms(u.attribute(), u.value())) {
    if (folded.find(FoldCase(form)) != std::string::npos) return true;
  }
  return false;
}

inline bool AllValuesMatch(const Sample& s, std::string_view text, const Lexicon& lexicon) {
  if (s.name_unit && !ValueMatches(*s.name_unit, text, lexicon)) return false;
  return std::all_of(s.units.begin(), s.units.end(),
                     [&](const DataUnit& u) { return ValueMatches(u, text, lexicon); });
}

inline std::vector<Sample> FilterKv(const std::vector<Sample>& samples, const LoadOptions& opt) {
  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (opt.keep_matching_references) {
      Sample kept = s;
      kept.references.clear();
      for (const auto& r : s.references) {
        if (AllValuesMatch(s, r, opt.lexicon)) kept.references.push_back(r);
      }
      if (!kept.references.empty()) out.push_back(std::move(kept));
      continue;
    }
    if (s.references.empty()) continue;
    const bool ok = std::all_of(s.references.begin(), s.references.end(),
                                [&](const std::string& r) { return AllValuesMatch(s, r, opt.lexicon); });
    if (ok) out.push_back(s);
  }
  return out;
}

inline std::vector<Sample> FilterToVocabulary(const std::vector<Sample>& samples,
                                              const std::set<std::string>& vocabulary) {
  std::vector<Sample> out;
  for (const auto& s : samples) {
    const bool ok = std::all_of(s.units.begin(), s.units.end(),
                                [&](const DataUnit& u) { return vocabulary.contains(u.id()); });
    if (ok) out.push_back(s);
  }
  return out;
}

inline Corpus FilterCorpus(Corpus c, const LoadOptions& opt) {
  if (c.dialect == Dialect::kKeyValue) {
    c.train = FilterKv(c.train, opt);
    c.test = FilterKv(c.test, opt);
  }
  c.RebuildVocabulary();
  if (c.train.empty()) throw Error(ErrorKind::kEmptyCorpus, "training set is empty after filtering");
  if (c.dialect == Dialect::kTriple) c.test = FilterToVocabulary(c.test, c.unit_vocabulary);
  return c;
}

inline Corpus LoadCorpus(Dialect dialect, const std::filesystem::path& train_path,
                         const std::filesystem::path& test_path, const LoadOptions& opt = {}) {
  Corpus c;
  c.dialect = dialect;
  c.train = ReadSource(dialect, train_path, "train", opt.csv);
  c.test = ReadSource(dialect, test_path, "test", opt.csv);
  if (c.train.empty()) throw Error(ErrorKind::kEmptyCorpus, "training set is empty");
  if (!opt.filter) {
    c.RebuildVocabulary();
    return c;
  }
  return FilterCorpus(std::move(c), opt);
}

struct CorpusStats {
  size_t n_train = 0;
  size_t n_test = 0;
  size_t n_distinct_units = 0;
  size_t n_distinct_attributes = 0;
  std::map<size_t, size_t> train_histogram;
  std::map<size_t, size_t> test_histogram;
};

inline CorpusStats ComputeCorpusStats(const Corpus& c) {
  CorpusStats st;
  st.n_train = c.train.size();
  st.n_test = c.test.size();
  st.n_distinct_units = UnionOfUnitIds(c.train).size();
  std::set<std::string> attributes;
  size_t max_size = 0;
  for (const auto* part : {&c.train, &c.test}) {
    for (const auto& s : *part) max_size = std::max(max_size, s.size());
  }
  for (size_t k = 1; k <= max_size; ++k) {
    st.train_histogram[k] = 0;
    st.test_histogram[k] = 0;
  }
  for (const auto& s : c.train) {
    ++st.train_histogram[s.size()];
    for (const auto& u : s.units) {
      if (!u.is_triple()) attributes.insert(u.attribute());
    }
  }
  for (const auto& s : c.test) ++st.test_histogram[s.size()];
  st.n_distinct_attributes = attributes.size();
  return st;
}

inline Json CorpusStatsToJson(const CorpusStats& st) {
  auto hist = [](const std::map<size_t, size_t>& h) {
    Json j = Json::object();
    for (const auto& [k, n] : h) j[std::to_string(k)] = n;
    return j;
  };
  return Json{{"n_train", st.n_train},
              {"n_test", st.n_test},
              {"n_distinct_units", st.n_distinct_units},
              {"n_distinct_attributes", st.n_distinct_attributes},
              {"train_histogram", hist(st.train_histogram)},
              {"test_histogram", hist(st.test_histogram)}};
}

}  // namespace spor
