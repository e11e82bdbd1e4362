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

// Prompt linearization, generation through an external completion endpoint,
// and report files.
//
// Endpoint contract: POST <base>/generate with {"prompt", "decoding"}; the
// reply is {"text"}. A bearer token is read from a configurable environment
// variable when set.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "spor/core.hpp"
#include "spor/io.hpp"
#include "spor/predictions.hpp"

namespace spor {

inline constexpr const char* kTriplePrefix = "translate from Triple to Text:";
inline constexpr const char* kKvPrefix = "translate from MR to Text:";

inline std::string Linearize(const Sample& sample, const std::vector<size_t>& order, Dialect dialect) {
  if (order.size() != sample.units.size()) {
    throw Error(ErrorKind::kInvalidParameter, "presented order is not a permutation of the units");
  }
  std::vector<bool> seen(order.size(), false);
  for (size_t i : order) {
    if (i >= order.size() || seen[i]) {
      throw Error(ErrorKind::kInvalidParameter, "presented order is not a permutation of the units");
    }
    seen[i] = true;
  }
  std::string out;
  if (dialect == Dialect::kTriple) {
    out = kTriplePrefix;
    for (size_t i : order) {
      const auto& u = sample.units[i];
      out += " <head> " + u.subject() + " <relation> " + u.predicate() + " <tail> " + u.object();
    }
    return out;
  }
  out = kKvPrefix;
  out.push_back(' ');
  bool first = true;
  auto item = [&](const DataUnit& u) {
    if (!first) out += ", ";
    first = false;
    out += u.attribute() + "[" + u.value() + "]";
  };
  if (sample.name_unit) item(*sample.name_unit);
  for (size_t i : order) item(sample.units[i]);
  return out;
}

inline std::string Linearize(const Sample& sample, Dialect dialect) {
  std::vector<size_t> order(sample.units.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  return Linearize(sample, order, dialect);
}

struct GenerationRequest {
  std::string sample_id;
  std::string variant = "orig";
  std::string prompt;
};

inline Json RequestToJson(const GenerationRequest& r) {
  return Json{{"sample_id", r.sample_id}, {"variant", r.variant}, {"prompt", r.prompt}};
}

inline GenerationRequest RequestFromJson(const Json& j) {
  try {
    return {j.at("sample_id").get<std::string>(), j.value("variant", std::string("orig")),
            j.at("prompt").get<std::string>()};
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad request record: ") + e.what());
  }
}

inline std::vector<GenerationRequest> ReadRequests(const std::filesystem::path& path) {
  std::vector<GenerationRequest> out;
  for (const auto& j : ReadJsonLines(path)) out.push_back(RequestFromJson(j));
  return out;
}

inline void WriteRequests(const std::filesystem::path& path, const std::vector<GenerationRequest>& reqs) {
  std::vector<Json> out;
  out.reserve(reqs.size());
  for (const auto& r : reqs) out.push_back(RequestToJson(r));
  WriteJsonLines(path, out);
}

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string credentials_env = "SPOR_API_KEY";
  int timeout_seconds = 60;
  size_t max_concurrency = 4;
  int attempts = 3;
  int backoff_ms = 250;
  Json decoding = Json{{"max_new_tokens", 256}, {"num_beams", 1}, {"do_sample", false}};
};

inline Json EndpointConfigToJson(const EndpointConfig& c) {
  return Json{{"base_url", c.base_url},
              {"credentials_env", c.credentials_env},
              {"timeout_seconds", c.timeout_seconds},
              {"max_concurrency", c.max_concurrency},
              {"attempts", c.attempts},
              {"backoff_ms", c.backoff_ms},
              {"decoding", c.decoding}};
}

namespace detail {

// "http://host:port/prefix" -> ("http://host:port", "/prefix").
inline std::pair<std::string, std::string> SplitBaseUrl(const std::string& url) {
  const size_t scheme = url.find("://");
  const size_t start = scheme == std::string::npos ? 0 : scheme + 3;
  const size_t slash = url.find('/', start);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace detail

class EndpointClient {
 public:
  explicit EndpointClient(EndpointConfig config) : config_(std::move(config)) {
    auto [host, prefix] = detail::SplitBaseUrl(config_.base_url);
    host_ = host;
    path_ = prefix + "/generate";
    if (const char* key = std::getenv(config_.credentials_env.c_str())) token_ = key;
  }

  // Retries transport failures and non-200 replies with exponential backoff.
  std::string Generate(const GenerationRequest& req) const {
    httplib::Client cli(host_);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);
    if (!token_.empty()) cli.set_bearer_token_auth(token_);
    const std::string body = DumpJson(Json{{"prompt", req.prompt}, {"decoding", config_.decoding}});
    std::string last_error;
    int delay = config_.backoff_ms;
    for (int attempt = 0; attempt < config_.attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
      }
      auto res = cli.Post(path_, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      Json reply;
      try {
        reply = Json::parse(res->body);
      } catch (const Json::exception&) {
        throw Error(ErrorKind::kProtocolError, "reply for " + req.sample_id + " is not JSON");
      }
      if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
        throw Error(ErrorKind::kProtocolError, "reply for " + req.sample_id + " has no text field");
      }
      return reply["text"].get<std::string>();
    }
    throw Error(ErrorKind::kGenerationError,
                "sample " + req.sample_id + " variant " + req.variant + ": " + last_error);
  }

 private:
  EndpointConfig config_;
  std::string host_;
  std::string path_;
  std::string token_;
};

// Completed records are appended to `<out>.partial` as they arrive, so a rerun
// only requests what is missing. The final store follows request order.
inline PredictionStore RunGeneration(const std::vector<GenerationRequest>& requests,
                                     const EndpointConfig& config, const std::filesystem::path& out) {
  const std::filesystem::path partial = out.string() + ".partial";
  PredictionStore done;
  if (std::filesystem::exists(partial)) {
    std::ifstream in(partial, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      try {
        done.Add(PredictionFromJson(Json::parse(line)));
      } catch (const std::exception&) {
        // A torn last line from an interrupted run.
      }
    }
  }

  std::vector<size_t> todo;
  for (size_t i = 0; i < requests.size(); ++i) {
    if (done.Find(requests[i].sample_id, requests[i].variant) == nullptr) todo.push_back(i);
  }

  if (!todo.empty()) {
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream log(partial, std::ios::binary | std::ios::app);
    if (!log) throw Error(ErrorKind::kIo, "cannot write " + partial.string());
    EndpointClient client(config);
    std::mutex mu;
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    auto worker = [&] {
      while (!failed) {
        const size_t k = next++;
        if (k >= todo.size()) return;
        const auto& req = requests[todo[k]];
        try {
          Prediction p{req.sample_id, req.variant, client.Generate(req), req.prompt};
          std::lock_guard<std::mutex> lock(mu);
          log << DumpJson(PredictionToJson(p)) << '\n';
          log.flush();
          done.Add(std::move(p));
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    };
    const size_t n = std::max<size_t>(1, std::min(config.max_concurrency, todo.size()));
    std::vector<std::thread> threads;
    for (size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  PredictionStore final_store;
  for (const auto& req : requests) {
    const auto* p = done.Find(req.sample_id, req.variant);
    final_store.Add(*p);
  }
  final_store.Save(out);
  std::filesystem::remove(partial);
  return final_store;
}

// --- reports --------------------------------------------------------------

class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void Add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string Render() const {
    std::vector<size_t> width;
    for (const auto& r : rows_) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], DisplayWidth(r[i]));
    }
    std::string out;
    for (size_t k = 0; k < rows_.size(); ++k) {
      const auto& r = rows_[k];
      for (size_t i = 0; i < r.size(); ++i) {
        out += r[i];
        if (i + 1 < r.size()) out += std::string(width[i] - DisplayWidth(r[i]) + 2, ' ');
      }
      out += '\n';
      if (k == 0) {
        size_t total = 0;
        for (size_t w : width) total += w + 2;
        out += std::string(total > 2 ? total - 2 : 0, '-') + '\n';
      }
    }
    return out;
  }

 private:
  static size_t DisplayWidth(const std::string& s) {
    size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  }
  std::vector<std::vector<std::string>> rows_;
};

inline std::string FormatFixed(double v, int digits = 2) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

struct ReportBundle {
  std::string aspect;
  Json config;
  std::map<std::string, std::string> artifact_hashes;  // file name -> hash
  Json results;
  std::string table;
};

// Writes <dir>/<aspect>_report.json and <dir>/<aspect>_report.txt.
inline void EmitReport(const std::filesystem::path& dir, const ReportBundle& b) {
  Json j;
  j["aspect"] = b.aspect;
  j["config"] = b.config;
  j["config_hash"] = Fnv1aHex(DumpJson(b.config));
  j["artifacts"] = b.artifact_hashes;
  j["results"] = b.results;
  WriteFile(dir / (b.aspect + "_report.json"), DumpJsonPretty(j) + "\n");
  std::string txt = b.aspect + " report\nconfig hash " + j["config_hash"].get<std::string>() + "\n";
  for (const auto& [name, hash] : b.artifact_hashes) txt += "  " + name + "  " + hash + "\n";
  txt += "\n" + b.table;
  WriteFile(dir / (b.aspect + "_report.txt"), txt);
}

}  // namespace spor
