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

// Text utilities shared by alignment, copy checking and scoring.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spor/core.hpp"

namespace spor {

inline bool IsAsciiPunct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && ((u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) ||
                      (u >= 0x5b && u <= 0x60) || (u >= 0x7b && u <= 0x7e));
}

inline bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool IsPunctToken(std::string_view tok) {
  return !tok.empty() && std::all_of(tok.begin(), tok.end(), IsAsciiPunct);
}

// Whitespace split; leading and trailing ASCII punctuation characters become
// one-character tokens. Inner punctuation stays ("1080-6377", "Rayel's").
inline std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsAsciiSpace(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !IsAsciiSpace(text[j])) ++j;
    if (j > i) {
      std::string_view word = text.substr(i, j - i);
      size_t b = 0, e = word.size();
      while (b < e && IsAsciiPunct(word[b])) ++b;
      while (e > b && IsAsciiPunct(word[e - 1])) --e;
      for (size_t k = 0; k < b; ++k) out.emplace_back(1, word[k]);
      if (e > b) out.emplace_back(word.substr(b, e - b));
      for (size_t k = std::max(b, e); k < word.size(); ++k) out.emplace_back(1, word[k]);
    }
    i = j;
  }
  return out;
}

// ASCII case folding; other bytes pass through.
inline std::string FoldCase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::vector<std::string> FoldTokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(FoldCase(t));
  return out;
}

// Lenient UTF-8 decode; invalid bytes map to themselves.
inline std::u32string DecodeUtf8(std::string_view s) {
  std::u32string out;
  size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = c >= 0xf0 ? 3 : c >= 0xe0 ? 2 : c >= 0xc0 ? 1 : 0;
    if (c >= 0x80 && c < 0xc0) extra = 0;
    if (i + static_cast<size_t>(extra) >= s.size()) extra = 0;
    char32_t cp = extra == 0 ? c : extra == 1 ? (c & 0x1f) : extra == 2 ? (c & 0x0f) : (c & 0x07);
    bool valid = true;
    for (int k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<size_t>(k)]);
      if ((cc & 0xc0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!valid) {
      cp = c;
      extra = 0;
    }
    out.push_back(cp);
    i += static_cast<size_t>(extra) + 1;
  }
  return out;
}

// Character-level Levenshtein distance over code points.
inline size_t EditDistance(const std::u32string& a, const std::u32string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline size_t EditDistance(std::string_view a, std::string_view b) {
  return EditDistance(DecodeUtf8(a), DecodeUtf8(b));
}

inline std::string UnderscoresToSpaces(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

// Leftmost start index of `needle` as a contiguous run in `hay`, or -1.
inline long FindTokenRun(const std::vector<std::string>& hay,
                         const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return -1;
  for (size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) {
      return static_cast<long>(i);
    }
  }
  return -1;
}

namespace detail {

inline std::string NormalizeForMatch(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : FoldCase(UnderscoresToSpaces(s))) {
    if (IsAsciiSpace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

// Case-insensitive, underscore/space-normalized substring test.
inline bool ContainsNormalized(std::string_view text, std::string_view phrase) {
  const std::string p = detail::NormalizeForMatch(phrase);
  return !p.empty() && detail::NormalizeForMatch(text).find(p) != std::string::npos;
}

// Case-insensitive, underscore/space-normalized phrase containment with word
// boundaries on both ends (an ASCII alphanumeric may not touch the match).
inline bool ContainsPhrase(std::string_view text, std::string_view phrase) {
  const std::string t = detail::NormalizeForMatch(text);
  const std::string p = detail::NormalizeForMatch(phrase);
  if (p.empty()) return false;
  auto alnum = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  };
  for (size_t pos = t.find(p); pos != std::string::npos; pos = t.find(p, pos + 1)) {
    const bool left_ok = pos == 0 || !alnum(t[pos - 1]) || !alnum(p.front());
    const size_t end = pos + p.size();
    const bool right_ok = end == t.size() || !alnum(t[end]) || !alnum(p.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

// Per-attribute surface forms for values that are not verbalized literally
// (e.g. familyFriendly[no] -> "not family friendly"). File format:
//   {"<attribute>": {"<value>": ["surface form", ...]}}
struct Lexicon {
  std::map<std::string, std::map<std::string, std::vector<std::string>>> forms;

  // The value itself first, then any configured alternatives.
  std::vector<std::string> SurfaceForms(const std::string& attribute,
                                        const std::string& value) const {
    std::vector<std::string> out{value};
    auto a = forms.find(attribute);
    if (a != forms.end()) {
      auto v = a->second.find(value);
      if (v != a->second.end()) out.insert(out.end(), v->second.begin(), v->second.end());
    }
    return out;
  }
};

}  // namespace spor
