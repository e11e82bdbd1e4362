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

// Model outputs keyed by (sample id, variant). Variants are "a" and "b" for
// the two orders of a permutation pair and "orig" for the presented order.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spor/core.hpp"
#include "spor/io.hpp"

namespace spor {

struct Prediction {
  std::string sample_id;
  std::string variant = "orig";
  std::string text;
  std::string prompt;
};

inline Json PredictionToJson(const Prediction& p) {
  Json j{{"sample_id", p.sample_id}, {"variant", p.variant}, {"text", p.text}};
  if (!p.prompt.empty()) j["prompt"] = p.prompt;
  return j;
}

inline Prediction PredictionFromJson(const Json& j) {
  try {
    Prediction p;
    p.sample_id = j.at("sample_id").get<std::string>();
    p.variant = j.value("variant", std::string("orig"));
    p.text = j.at("text").get<std::string>();
    p.prompt = j.value("prompt", std::string());
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad prediction record: ") + e.what());
  }
}

class PredictionStore {
 public:
  void Add(Prediction p) {
    auto key = std::make_pair(p.sample_id, p.variant);
    auto it = index_.find(key);
    if (it != index_.end()) {
      records_[it->second] = std::move(p);
      return;
    }
    index_.emplace(std::move(key), records_.size());
    records_.push_back(std::move(p));
  }

  const Prediction* Find(const std::string& sample_id, const std::string& variant) const {
    auto it = index_.find({sample_id, variant});
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  const std::string& Text(const std::string& sample_id, const std::string& variant) const {
    const auto* p = Find(sample_id, variant);
    if (p == nullptr) {
      throw Error(ErrorKind::kMissingPrediction,
                  "no prediction for sample " + sample_id + " variant " + variant);
    }
    return p->text;
  }

  const std::vector<Prediction>& records() const { return records_; }
  size_t size() const { return records_.size(); }

  static PredictionStore Load(const std::filesystem::path& path) {
    PredictionStore store;
    for (const auto& j : ReadJsonLines(path)) store.Add(PredictionFromJson(j));
    return store;
  }

  void Save(const std::filesystem::path& path) const {
    std::vector<Json> out;
    out.reserve(records_.size());
    for (const auto& p : records_) out.push_back(PredictionToJson(p));
    WriteJsonLines(path, out);
  }

 private:
  std::vector<Prediction> records_;
  std::map<std::pair<std::string, std::string>, size_t> index_;
};

}  // namespace spor
