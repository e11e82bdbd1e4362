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
// spor: build the four evaluation suites from a corpus, run generation
// against an endpoint, and score prediction files.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spor.hpp"

namespace fs = std::filesystem;
using namespace spor;

namespace {

std::vector<GenerationRequest> OrigRequests(const std::vector<Sample>& samples, Dialect d) {
  std::vector<GenerationRequest> out;
  for (const auto& s : samples) out.push_back({s.id, "orig", Linearize(s, d)});
  return out;
}

Lexicon MaybeLexicon(const std::string& path) { return path.empty() ? Lexicon{} : LoadLexicon(path); }

std::vector<PredictionStore> LoadStores(const std::vector<std::string>& paths) {
  std::vector<PredictionStore> out;
  for (const auto& p : paths) out.push_back(PredictionStore::Load(p));
  return out;
}

// Paths are recorded relative to the report directory so a report does not
// depend on where the work tree lives.
std::string Rel(const std::string& path, const fs::path& report_dir) {
  return fs::relative(fs::absolute(path), fs::absolute(report_dir)).generic_string();
}

std::map<std::string, std::string> Hashes(const std::vector<std::string>& paths, const fs::path& report_dir) {
  std::map<std::string, std::string> out;
  for (const auto& p : paths) out[Rel(p, report_dir)] = HashFile(p);
  return out;
}

Json RelList(const std::vector<std::string>& paths, const fs::path& report_dir) {
  Json j = Json::array();
  for (const auto& p : paths) j.push_back(Rel(p, report_dir));
  return j;
}

Json ReadJsonFile(const fs::path& p) { return Json::parse(ReadFile(p)); }

void Emit(const fs::path& dir, const std::string& aspect, Json config,
          std::map<std::string, std::string> hashes, const AspectResult& r) {
  fs::create_directories(dir);
  EmitReport(dir, ReportBundle{aspect, std::move(config), std::move(hashes), r.json, r.table});
  std::cout << r.table;
}

Json HistogramJson(const std::vector<size_t>& h) {
  Json j = Json::object();
  for (size_t k = 1; k < h.size(); ++k) j[std::to_string(k)] = h[k];
  return j;
}

Json TrainingStatsJson(const TrainingSetStats& s) {
  return Json{{"samples", s.samples},
              {"unit_occurrences", s.unit_occurrences},
              {"atom_occurrences", s.atom_occurrences},
              {"distinct_atoms", s.distinct_atoms},
              {"distinct_pairs", s.distinct_pairs},
              {"pair_occurrences", s.pair_occurrences}};
}

std::set<std::string> SplitList(const std::string& s) {
  std::set<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t comma = s.find(',', start);
    const std::string item = Trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.insert(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Json PositionJson(const Position& p) {
  if (p.found()) return p.index;
  return p.kind == PositionKind::kBoundary ? "boundary" : "notfound";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional generalization suites for data-to-text generation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a corpus, filter it, write canonical files");
  std::string in_dialect = "triple", in_train, in_test, in_lexicon, in_out, in_mr_col = "mr", in_ref_col = "ref";
  bool in_no_filter = false, in_keep_refs = false;
  ingest->add_option("--dialect", in_dialect)->check(CLI::IsMember({"triple", "kv"}));
  ingest->add_option("--train", in_train)->required();
  ingest->add_option("--test", in_test)->required();
  ingest->add_option("--lexicon", in_lexicon);
  ingest->add_option("--mr-column", in_mr_col);
  ingest->add_option("--ref-column", in_ref_col);
  ingest->add_flag("--no-filter", in_no_filter);
  ingest->add_flag("--keep-matching-references", in_keep_refs,
                   "drop only references that miss a value instead of the whole sample");
  ingest->add_option("--out", in_out)->required();

  // build
  auto* build = app.add_subcommand("build", "Construct an evaluation suite");
  build->require_subcommand(1);
  std::string b_corpus, b_out;
  uint64_t b_seed = 0;
  double b_r = kDefaultDivergenceThreshold;

  auto* b_sys = build->add_subcommand("systematicity", "Atom / Combination / test");
  size_t b_restarts = 20;
  std::string b_guard = "strict";
  b_sys->add_option("--corpus", b_corpus)->required();
  b_sys->add_option("--seed", b_seed);
  b_sys->add_option("--restarts", b_restarts)->check(CLI::PositiveNumber);
  b_sys->add_option("--r", b_r)->check(CLI::Range(0.0, 1.0));
  b_sys->add_option("--guard", b_guard)->check(CLI::IsMember({"strict", "pair-safe"}));
  b_sys->add_option("--out", b_out)->required();

  auto* b_prod = build->add_subcommand("productivity", "Invisible / Visible / test per threshold");
  std::vector<size_t> b_ns{3, 4, 5};
  std::string b_domains;
  b_prod->add_option("--corpus", b_corpus)->required();
  b_prod->add_option("--N", b_ns)->delimiter(',');
  b_prod->add_option("--r", b_r)->check(CLI::Range(0.0, 1.0));
  b_prod->add_option("--seed", b_seed);
  b_prod->add_option("--domains", b_domains, "comma-separated domain filter");
  b_prod->add_option("--out", b_out)->required();

  auto* b_order = build->add_subcommand("order", "Training arrangement and permutation pairs");
  std::string b_variant = "original", b_lexicon;
  b_order->add_option("--corpus", b_corpus)->required();
  b_order->add_option("--variant", b_variant)->check(CLI::IsMember({"original", "match"}));
  b_order->add_option("--seed", b_seed);
  b_order->add_option("--lexicon", b_lexicon);
  b_order->add_option("--out", b_out)->required();

  auto* b_rules = build->add_subcommand("rules", "Hidden-information inputs");
  std::string b_dialect, b_name, b_near;
  size_t b_limit = 0;
  b_rules->add_option("--corpus", b_corpus)->required();
  b_rules->add_option("--dialect", b_dialect)->check(CLI::IsMember({"triple", "kv"}));
  b_rules->add_option("--name", b_name, "key-value name value (default: most frequent)");
  b_rules->add_option("--near", b_near);
  b_rules->add_option("--limit", b_limit);
  b_rules->add_option("--out", b_out)->required();

  // align
  auto* align = app.add_subcommand("align", "Dump unit positions found in references or predictions");
  std::string a_corpus, a_field = "references", a_pred, a_variant = "orig", a_split = "test", a_lexicon, a_out;
  align->add_option("--corpus", a_corpus)->required();
  align->add_option("--text-field", a_field)->check(CLI::IsMember({"references", "prediction"}));
  align->add_option("--pred", a_pred);
  align->add_option("--variant", a_variant);
  align->add_option("--split", a_split)->check(CLI::IsMember({"train", "test"}));
  align->add_option("--lexicon", a_lexicon);
  align->add_option("--out", a_out, "dump file (default: standard output)");

  // generate
  auto* gen = app.add_subcommand("generate", "Request outputs from a completion endpoint");
  std::string g_requests, g_out;
  EndpointConfig g_cfg;
  gen->add_option("--requests", g_requests)->required();
  gen->add_option("--out", g_out)->required();
  gen->add_option("--endpoint", g_cfg.base_url);
  gen->add_option("--credentials-env", g_cfg.credentials_env);
  gen->add_option("--timeout", g_cfg.timeout_seconds)->check(CLI::PositiveNumber);
  gen->add_option("--concurrency", g_cfg.max_concurrency)->check(CLI::PositiveNumber);
  gen->add_option("--attempts", g_cfg.attempts)->check(CLI::PositiveNumber);
  gen->add_option("--backoff-ms", g_cfg.backoff_ms);

  // eval
  auto* ev = app.add_subcommand("eval", "Score prediction files");
  ev->require_subcommand(1);
  std::string e_test, e_report, e_pairs, e_hidden, e_lexicon;
  std::vector<std::string> e_pred_a, e_pred_b, e_pred;
  size_t e_resamples = kDefaultResamples;
  uint64_t e_boot_seed = 0;
  bool e_no_perf = false;
  auto twin = [&](CLI::App* c) {
    c->add_option("--test", e_test)->required();
    c->add_option("--pred-a", e_pred_a, "one store per seed, model trained on the first set")
        ->required()->delimiter(',');
    c->add_option("--pred-b", e_pred_b, "one store per seed, model trained on the second set")
        ->required()->delimiter(',');
    c->add_option("--resamples", e_resamples)->check(CLI::PositiveNumber);
    c->add_option("--bootstrap-seed", e_boot_seed);
    c->add_option("--report", e_report)->required();
  };
  auto* e_sys = ev->add_subcommand("systematicity", "Atom vs Combination");
  twin(e_sys);
  auto* e_prod = ev->add_subcommand("productivity", "Invisible vs Visible");
  twin(e_prod);
  auto* e_order = ev->add_subcommand("order", "Fidelity, data ordering, CWIO, PERF");
  e_order->add_option("--pairs", e_pairs)->required();
  e_order->add_option("--pred", e_pred, "one store per seed")->required()->delimiter(',');
  e_order->add_option("--test", e_test, "samples for CWIO (orig predictions)");
  e_order->add_option("--lexicon", e_lexicon);
  e_order->add_flag("--no-perf", e_no_perf);
  e_order->add_option("--report", e_report)->required();
  auto* e_rules = ev->add_subcommand("rules", "Copy-rule cases");
  e_rules->add_option("--hidden", e_hidden)->required();
  e_rules->add_option("--pred", e_pred, "one store per seed")->required()->delimiter(',');
  e_rules->add_option("--report", e_report)->required();

  // report
  auto* rep = app.add_subcommand("report", "Collect aspect reports into one summary");
  std::string r_dir, r_out;
  rep->add_option("--reports", r_dir)->required();
  rep->add_option("--out", r_out, "summary file (default <reports>/summary.txt)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      LoadOptions opt;
      opt.filter = !in_no_filter;
      opt.keep_matching_references = in_keep_refs;
      opt.lexicon = MaybeLexicon(in_lexicon);
      opt.csv = {in_mr_col, in_ref_col};
      const auto corpus = LoadCorpus(ParseDialect(in_dialect), in_train, in_test, opt);
      WriteCorpusDir(in_out, corpus);
      const Json stats = CorpusStatsToJson(ComputeCorpusStats(corpus));
      WriteFile(fs::path(in_out) / "stats.json", DumpJsonPretty(stats) + "\n");
      std::cout << DumpJsonPretty(stats) << "\n";
      return 0;
    }

    if (*b_sys) {
      const auto corpus = ReadCorpusDir(b_corpus);
      SystematicityOptions opt{b_restarts, b_seed, b_r, ParseGuard(b_guard)};
      const auto split = BestOfRestarts(corpus, opt);
      const auto v = VerifySystematicity(split);
      for (const auto* a : {&split.atom, &split.combination, &split.test}) WriteArtifact(b_out, *a);
      const Json ver{{"passed", true},
                     {"atoms", v.atoms},
                     {"test_samples", v.test_samples},
                     {"replacements", v.replacements},
                     {"divergence", v.divergence},
                     {"threshold", v.threshold},
                     {"atom", TrainingStatsJson(v.atom)},
                     {"combination", TrainingStatsJson(v.combination)},
                     {"metadata", split.test.metadata}};
      WriteFile(fs::path(b_out) / "verification.json", DumpJsonPretty(ver) + "\n");
      WriteRequests(fs::path(b_out) / "requests.jsonl", OrigRequests(split.test.samples, corpus.dialect));
      std::cout << DumpJsonPretty(ver) << "\n";
      return 0;
    }

    if (*b_prod) {
      const auto corpus = ReadCorpusDir(b_corpus);
      std::optional<std::set<std::string>> domains;
      if (!b_domains.empty()) domains = SplitList(b_domains);
      for (size_t n : b_ns) {
        const auto split = BuildProductivitySplit(corpus, n, b_r, b_seed, domains);
        const auto v = VerifyProductivity(split);
        const fs::path dir = fs::path(b_out) / ("N" + std::to_string(n));
        for (const auto* a : {&split.invisible, &split.visible, &split.test}) WriteArtifact(dir, *a);
        const Json ver{{"passed", true},
                       {"threshold", v.threshold},
                       {"invisible_units", v.invisible_units},
                       {"visible_units", v.visible_units},
                       {"divergence", v.divergence},
                       {"r", b_r},
                       {"test_samples", v.test_samples},
                       {"replacements", v.replacements},
                       {"invisible_histogram", HistogramJson(v.invisible_histogram)},
                       {"visible_histogram", HistogramJson(v.visible_histogram)},
                       {"metadata", split.invisible.metadata}};
        WriteFile(dir / "verification.json", DumpJsonPretty(ver) + "\n");
        WriteRequests(dir / "requests.jsonl", OrigRequests(split.test.samples, corpus.dialect));
        std::cout << "N=" << n << ": " << v.test_samples << " test samples, divergence "
                  << FormatFixed(v.divergence, 4) << "\n";
      }
      return 0;
    }

    if (*b_order) {
      const auto corpus = ReadCorpusDir(b_corpus);
      const Lexicon lex = MaybeLexicon(b_lexicon);
      const fs::path out(b_out);
      Json info{{"variant", b_variant}, {"seed", b_seed}};
      if (b_variant == "match") {
        const auto match = BuildMatchTraining(corpus.train, lex);
        const auto failures = MatchRoundTripFailures(match, lex);
        if (!failures.empty()) {
          throw Error(ErrorKind::kVerificationFailure, "Match round trip fails for " + failures.front());
        }
        WriteArtifact(out, match.artifact);
        info["flagged"] = match.flagged;
        info["round_trip_failures"] = failures.size();
      } else {
        WriteArtifact(out, SplitArtifact{Aspect::kOrderInvariance, "original", corpus.train, {}});
      }
      const auto pairs = GeneratePermutationPairs(corpus.test, b_seed, lex);
      std::vector<Json> records;
      std::vector<GenerationRequest> reqs;
      for (const auto& p : pairs) {
        records.push_back(PairedSampleToJson(p));
        reqs.push_back({p.pair.sample_id, "a", Linearize(p.sample, p.pair.order_a, corpus.dialect)});
        reqs.push_back({p.pair.sample_id, "b", Linearize(p.sample, p.pair.order_b, corpus.dialect)});
      }
      WriteJsonLines(out / "pairs.jsonl", records);
      WriteSamples(out / "test.jsonl", corpus.test);
      for (auto& r : OrigRequests(corpus.test, corpus.dialect)) reqs.push_back(std::move(r));
      WriteRequests(out / "requests.jsonl", reqs);
      info["pairs"] = pairs.size();
      info["test_samples"] = corpus.test.size();
      WriteFile(out / "order.json", DumpJsonPretty(info) + "\n");
      std::cout << DumpJsonPretty(info) << "\n";
      return 0;
    }

    if (*b_rules) {
      const auto corpus = ReadCorpusDir(b_corpus);
      const Dialect d = b_dialect.empty() ? corpus.dialect : ParseDialect(b_dialect);
      std::vector<HiddenSample> hidden;
      Json info{{"dialect", DialectName(d)}};
      if (d == Dialect::kTriple) {
        hidden = BuildHiddenTripleSet(corpus.test);
      } else {
        std::vector<Sample> all = corpus.train;
        all.insert(all.end(), corpus.test.begin(), corpus.test.end());
        KvHiddenConfig cfg;
        cfg.name = b_name.empty() ? MostFrequentName(all) : b_name;
        if (!b_near.empty()) cfg.near = b_near;
        cfg.limit = b_limit;
        hidden = BuildHiddenKvSet(BuildValueInventory(all), cfg);
        info["name"] = cfg.name;
        info["attributes"] = cfg.attributes;
      }
      for (const auto& h : hidden) AssertNothingLeaks(h);
      std::vector<Json> records;
      std::vector<GenerationRequest> reqs;
      for (const auto& h : hidden) {
        records.push_back(HiddenSampleToJson(h));
        reqs.push_back({h.base.id, "orig", Linearize(h.base, h.dialect)});
      }
      const fs::path out(b_out);
      fs::create_directories(out);
      WriteJsonLines(out / "hidden.jsonl", records);
      WriteRequests(out / "requests.jsonl", reqs);
      info["samples"] = hidden.size();
      WriteFile(out / "rules.json", DumpJsonPretty(info) + "\n");
      std::cout << DumpJsonPretty(info) << "\n";
      return 0;
    }

    if (*align) {
      const auto corpus = ReadCorpusDir(a_corpus);
      const Lexicon lex = MaybeLexicon(a_lexicon);
      const auto& samples = a_split == "train" ? corpus.train : corpus.test;
      std::optional<PredictionStore> store;
      if (a_field == "prediction") {
        if (a_pred.empty()) throw Error(ErrorKind::kInvalidParameter, "--pred is required for predictions");
        store = PredictionStore::Load(a_pred);
      }
      std::vector<Json> dumps;
      size_t entities = 0, boundary = 0;
      auto dump = [&](const Sample& s, const std::string& source, const std::string& text) {
        const auto outcome = Align(s, text, lex);
        Json pos = Json::object();
        for (const auto& [k, p] : outcome.positions) pos[k] = PositionJson(p);
        Json j{{"sample_id", s.id}, {"source", source}, {"positions", pos},
               {"boundary_fraction", outcome.boundary_fraction}};
        j["unit_order"] = outcome.unit_order ? Json(*outcome.unit_order) : Json(nullptr);
        entities += outcome.positions.size();
        boundary += outcome.boundary_count;
        dumps.push_back(std::move(j));
      };
      for (const auto& s : samples) {
        if (store) {
          dump(s, "prediction:" + a_variant, store->Text(s.id, a_variant));
          continue;
        }
        for (size_t i = 0; i < s.references.size(); ++i) dump(s, "reference:" + std::to_string(i), s.references[i]);
      }
      if (a_out.empty()) {
        for (const auto& d : dumps) std::cout << DumpJson(d) << "\n";
        return 0;
      }
      WriteJsonLines(a_out, dumps);
      std::cout << dumps.size() << " texts, " << entities << " positions, boundary fraction "
                << FormatFixed(entities ? static_cast<double>(boundary) / entities : 0.0, 4) << "\n";
      return 0;
    }

    if (*gen) {
      const auto reqs = ReadRequests(g_requests);
      const auto store = RunGeneration(reqs, g_cfg, g_out);
      std::cout << store.size() << " predictions written to " << g_out << "\n";
      return 0;
    }

    if (*e_sys || *e_prod) {
      const bool sys = e_sys->parsed();
      const std::string aspect = sys ? "systematicity" : "productivity";
      const std::string na = sys ? "atom" : "invisible", nb = sys ? "combination" : "visible";
      const auto test = ReadSamples(e_test);
      const ParentMetric metric;
      auto result = EvaluateTwinSets(na, nb, test, LoadStores(e_pred_a), LoadStores(e_pred_b), metric,
                                     e_resamples, e_boot_seed);
      const fs::path verification = fs::path(e_test).parent_path() / "verification.json";
      if (fs::exists(verification)) result.json["verification"] = ReadJsonFile(verification);
      const fs::path rd(e_report);
      fs::create_directories(rd);
      Json config{{"aspect", aspect},
                  {"test", Rel(e_test, rd)},
                  {"pred_" + na, RelList(e_pred_a, rd)},
                  {"pred_" + nb, RelList(e_pred_b, rd)},
                  {"resamples", e_resamples},
                  {"bootstrap_seed", e_boot_seed},
                  {"parent", ParentParamsToJson(metric.params())}};
      std::vector<std::string> files{e_test};
      files.insert(files.end(), e_pred_a.begin(), e_pred_a.end());
      files.insert(files.end(), e_pred_b.begin(), e_pred_b.end());
      Emit(rd, aspect, config, Hashes(files, rd), result);
      return 0;
    }

    if (*e_order) {
      std::vector<PairedSample> pairs;
      for (const auto& j : ReadJsonLines(e_pairs)) pairs.push_back(PairedSampleFromJson(j));
      std::optional<std::vector<Sample>> test;
      if (!e_test.empty()) test = ReadSamples(e_test);
      const Lexicon lex = MaybeLexicon(e_lexicon);
      const ParentMetric metric;
      const auto result = EvaluateOrderAspect(pairs, LoadStores(e_pred), test ? &*test : nullptr, lex,
                                              e_no_perf ? nullptr : &metric);
      const fs::path rd(e_report);
      fs::create_directories(rd);
      Json config{{"aspect", "order"},
                  {"pairs", Rel(e_pairs, rd)},
                  {"pred", RelList(e_pred, rd)},
                  {"test", e_test.empty() ? Json(nullptr) : Json(Rel(e_test, rd))},
                  {"lexicon", e_lexicon.empty() ? Json(nullptr) : Json(Rel(e_lexicon, rd))},
                  {"perf", !e_no_perf}};
      if (!e_no_perf) config["parent"] = ParentParamsToJson(metric.params());
      std::vector<std::string> files{e_pairs};
      files.insert(files.end(), e_pred.begin(), e_pred.end());
      if (!e_test.empty()) files.push_back(e_test);
      if (!e_lexicon.empty()) files.push_back(e_lexicon);
      Emit(rd, "order", config, Hashes(files, rd), result);
      return 0;
    }

    if (*e_rules) {
      std::vector<HiddenSample> hidden;
      for (const auto& j : ReadJsonLines(e_hidden)) hidden.push_back(HiddenSampleFromJson(j));
      const auto result = EvaluateRulesAspect(hidden, LoadStores(e_pred));
      const fs::path rd(e_report);
      fs::create_directories(rd);
      Json config{{"aspect", "rules"}, {"hidden", Rel(e_hidden, rd)}, {"pred", RelList(e_pred, rd)}};
      std::vector<std::string> files{e_hidden};
      files.insert(files.end(), e_pred.begin(), e_pred.end());
      Emit(rd, "rules", config, Hashes(files, rd), result);
      return 0;
    }

    if (*rep) {
      const fs::path dir(r_dir);
      std::vector<fs::path> reports;
      for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() > 12 && name.substr(name.size() - 12) == "_report.json") reports.push_back(e.path());
      }
      std::sort(reports.begin(), reports.end());
      if (reports.empty()) throw Error(ErrorKind::kIo, "no *_report.json files in " + dir.string());
      std::string summary;
      Json index = Json::object();
      for (const auto& p : reports) {
        const Json j = ReadJsonFile(p);
        const std::string aspect = j.at("aspect").get<std::string>();
        index[aspect] = Json{{"config_hash", j.at("config_hash")}, {"report", p.filename().string()}};
        fs::path txt = p;
        txt.replace_filename(aspect + "_report.txt");
        summary += "== " + aspect + " ==\n" + (fs::exists(txt) ? ReadFile(txt) : std::string()) + "\n";
      }
      const fs::path out = r_out.empty() ? dir / "summary.txt" : fs::path(r_out);
      WriteFile(out, summary);
      WriteFile(out.parent_path() / "summary.json", DumpJsonPretty(index) + "\n");
      std::cout << summary;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "spor: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "spor: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
