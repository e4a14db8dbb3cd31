// Copyright 2026 The pairjudge Authors
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

#include "pairjudge/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pairjudge/constraints.hpp"
#include "pairjudge/corpus.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/metrics.hpp"
#include "pairjudge/text.hpp"

namespace pj::commands {

namespace fs = std::filesystem;

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw Error(ErrorKind::kIo, "write failed for " + path);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorKind::kIo, "cannot move output into " + path);
  }
}

std::vector<JsonLine> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::vector<JsonLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back({n, Json::parse(line)});
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kMalformedRecord, path + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::string jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

std::string or_default(const std::string& value, const std::string& fallback) {
  return value.empty() ? fallback : value;
}

Json load_report_json(const LoadReport& r) {
  return Json{{"lines", r.lines},
              {"ties_dropped", r.ties_dropped},
              {"non_english_dropped", r.non_english_dropped},
              {"multi_turn_dropped", r.multi_turn_dropped}};
}

}  // namespace

std::string build_corpus(config::AppConfig config, const config::Overrides& overrides) {
  config::apply_overrides(config, config::Command::kBuildCorpus, overrides);
  config::validate_for(config, config::Command::kBuildCorpus);
  const auto& cc = *config.corpus;
  const std::string stats_path = or_default(cc.stats, cc.out + ".stats.json");
  const std::string scripts_path = or_default(cc.scripts, cc.out + ".scripts.jsonl");
  const std::string rejections_path = or_default(cc.rejections, cc.out + ".rejections.jsonl");

  auto data = load_pairwise_dataset(cc.input, cc.load.options());
  for (const auto& p : data.pairs) {
    if (!p.instruction.constraints.empty()) {
      throw Error(ErrorKind::kInput, "record " + p.id + ": corpus instructions must be unconstrained");
    }
    corpus::sample_responses_of(p);
    if (p.extra.contains("code_sample_responses")) corpus::sample_responses_of(p, "code_sample_responses");
  }

  if (overrides.dry_run) {
    const auto n = static_cast<std::int64_t>(data.pairs.size());
    Json plan{{"command", "build-corpus"},
              {"dry_run", true},
              {"pairs", n},
              {"load", load_report_json(data.report)},
              {"planned",
               {{"question_generation", n},
                {"text_analysis", n},
                {"code_instructions", cc.code_samples ? n : 0}}},
              {"outputs", {{"corpus", cc.out}, {"stats", stats_path}, {"scripts", scripts_path},
                           {"rejections", rejections_path}}}};
    return plan.dump(2) + "\n";
  }

  auto gateway = config::make_gateway(config, cc.backend);
  auto sandbox = config::make_sandbox(config.sandbox);
  corpus::CorpusOptions opts;
  opts.seed = *cc.seed;
  opts.workers = cc.workers;
  opts.code_samples = cc.code_samples;
  opts.shuffle = cc.shuffle;
  opts.question_retry_budget = cc.question_retry_budget;
  opts.code.weights = cc.weights;
  opts.code.script.retry_budget = cc.retry_budget;
  opts.code.script.dialect = config.sandbox.dialect;
  opts.code.validation.retry_budget = cc.retry_budget;
  opts.code.validation.limits = config.sandbox.limits;

  auto run = corpus::run_corpus(data.pairs, *gateway, *sandbox, opts);
  auto stats = corpus::emit_corpus(run.samples, cc.out);
  stats.filter = run.filter;
  stats.rejected_analyses = run.rejected_analyses;

  std::vector<Json> rejections;
  for (const auto& r : run.rejections) rejections.push_back(corpus::to_json(r));
  write_file_atomic(stats_path, corpus::to_json(stats).dump(2) + "\n");
  write_file_atomic(scripts_path, jsonl(run.script_records));
  write_file_atomic(rejections_path, jsonl(rejections));

  return corpus::stats_report(stats) + "\nWrote " + std::to_string(run.samples.size()) + " samples to " + cc.out +
         "\n";
}

std::string judge(config::AppConfig config, const config::Overrides& overrides) {
  config::apply_overrides(config, config::Command::kJudge, overrides);
  config::validate_for(config, config::Command::kJudge);
  const auto& jc = *config.judge;
  const std::string manifest_path = or_default(jc.manifest, jc.out + ".manifest.json");

  auto data = load_pairwise_dataset(jc.input, jc.load.options());
  if (overrides.dry_run) {
    Json plan{{"command", "judge"},
              {"dry_run", true},
              {"pairs", data.pairs.size()},
              {"load", load_report_json(data.report)},
              {"mode", std::string(judge::to_string(jc.mode))},
              {"rounds", jc.rounds},
              {"outputs", {{"records", jc.out}, {"manifest", manifest_path}}}};
    return plan.dump(2) + "\n";
  }

  judge::RunConfig rc;
  rc.rounds_k = jc.rounds;
  rc.question_temperature = jc.question_temperature;
  rc.mode = jc.mode;
  rc.analyzer = config::make_gateway(config, jc.analyzer);
  rc.refiner = jc.refiner.empty() || jc.refiner == jc.analyzer ? rc.analyzer : config::make_gateway(config, jc.refiner);
  rc.seed = *jc.seed;
  rc.questions_per_round = jc.questions_per_round;
  rc.retry_budget = jc.retry_budget;
  rc.limits = config.sandbox.limits;
  rc.workers = jc.workers;
  auto sandbox = config::make_sandbox(config.sandbox);

  auto records = judge::judge_all(data.pairs, rc, *sandbox);
  std::vector<Json> rows;
  std::size_t errors = 0;
  for (const auto& r : records) {
    rows.push_back(judge::to_json(r));
    if (!r.original.verdict.choice) ++errors;
    if (!r.swapped.verdict.choice) ++errors;
  }
  write_file_atomic(jc.out, jsonl(rows));
  Json manifest = judge::run_manifest(rc, *sandbox);
  manifest["pairs"] = records.size();
  manifest["load"] = load_report_json(data.report);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");

  return "Judged " + std::to_string(records.size()) + " pairs in " + std::string(judge::to_string(jc.mode)) +
         " mode (" + std::to_string(errors) + " verdict errors); records in " + jc.out + "\n";
}

namespace {

std::vector<judge::JudgeRecord> load_subset(const std::string& name, const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, "records directory for subset " + name + " not found: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<judge::JudgeRecord> out;
  for (const auto& f : files) {
    for (const auto& row : read_jsonl(f)) {
      try {
        out.push_back(judge::judge_record_from_json(row.value));
      } catch (const Error& e) {
        throw Error(e.kind(), f + " line " + std::to_string(row.line) + ": " + e.what());
      }
    }
  }
  return out;
}

metrics::ConsistencyMetrics consistency_from(const std::string& path) {
  std::vector<bool> model;
  std::vector<bool> loose;
  std::vector<bool> strict;
  for (const auto& row : read_jsonl(path)) {
    const Json& j = row.value;
    if (!j.contains("response") || !j["response"].is_string() || !j.contains("constraint") ||
        !j.contains("model_pass") || !j["model_pass"].is_boolean()) {
      throw Error(ErrorKind::kMalformedRecord,
                  path + " line " + std::to_string(row.line) + ": need response, constraint, model_pass");
    }
    ConstraintSpec spec;
    try {
      spec = constraint_spec_from_json(j["constraint"]);
      constraints::validate(spec);
    } catch (const Error& e) {
      throw Error(ErrorKind::kSpec, path + " line " + std::to_string(row.line) + ": " + e.what());
    }
    const auto response = j["response"].get<std::string>();
    model.push_back(j["model_pass"].get<bool>());
    loose.push_back(constraints::check(response, spec, constraints::CheckMode::kLoose).pass);
    strict.push_back(constraints::check(response, spec, constraints::CheckMode::kStrict).pass);
  }
  return {metrics::consistency(model, loose), metrics::consistency(model, strict)};
}

}  // namespace

std::string bench(config::AppConfig config, const config::Overrides& overrides) {
  config::apply_overrides(config, config::Command::kBench, overrides);
  config::validate_for(config, config::Command::kBench);
  const auto& bc = *config.bench;

  std::vector<std::pair<std::string, std::vector<judge::JudgeRecord>>> subsets;
  for (const auto& [name, dir] : bc.subsets) subsets.emplace_back(name, load_subset(name, dir));
  auto report = metrics::build_report(subsets);
  if (!bc.consistency.empty()) report.consistency = consistency_from(bc.consistency);
  const std::string text = metrics::render_report(report);
  if (overrides.dry_run) return text;

  std::error_code ec;
  fs::create_directories(bc.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + bc.out_dir + ": " + ec.message());
  write_file_atomic((fs::path(bc.out_dir) / "report.txt").string(), text);
  write_file_atomic((fs::path(bc.out_dir) / "report.json").string(), metrics::to_json(report).dump(2) + "\n");
  return text;
}

std::string verify(config::AppConfig config, const config::Overrides& overrides) {
  config::apply_overrides(config, config::Command::kVerify, overrides);
  config::validate_for(config, config::Command::kVerify);
  const auto& vc = *config.verify;

  struct Response {
    std::string id;
    std::string text;
  };
  std::vector<Response> responses;
  for (const auto& row : read_jsonl(vc.responses)) {
    const Json& j = row.value;
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("response") ||
        !j["response"].is_string()) {
      throw Error(ErrorKind::kMalformedRecord,
                  vc.responses + " line " + std::to_string(row.line) + ": need string id and response");
    }
    responses.push_back({j["id"].get<std::string>(), j["response"].get<std::string>()});
  }

  struct Check {
    std::size_t line;
    ConstraintSpec spec;
    std::optional<std::string> response_id;
  };
  std::vector<Check> checks;
  for (const auto& row : read_jsonl(vc.constraints)) {
    Check c{row.line, {}, std::nullopt};
    try {
      c.spec = constraint_spec_from_json(row.value);
      constraints::validate(c.spec);
      if (row.value.contains("response_id")) {
        if (!row.value["response_id"].is_string()) throw Error(ErrorKind::kSpec, "response_id must be a string");
        c.response_id = row.value["response_id"].get<std::string>();
      }
    } catch (const Error& e) {
      throw Error(ErrorKind::kSpec, vc.constraints + " line " + std::to_string(row.line) + ": " + e.what());
    }
    checks.push_back(std::move(c));
  }

  std::vector<Json> rows;
  std::size_t loose_pass = 0;
  std::size_t strict_pass = 0;
  for (const auto& r : responses) {
    for (const auto& c : checks) {
      if (c.response_id && *c.response_id != r.id) continue;
      auto loose = constraints::check(r.text, c.spec, constraints::CheckMode::kLoose);
      auto strict = constraints::check(r.text, c.spec, constraints::CheckMode::kStrict);
      loose_pass += loose.pass;
      strict_pass += strict.pass;
      rows.push_back(Json{{"response_id", r.id},
                          {"constraint_line", c.line},
                          {"category", std::string(pj::to_string(c.spec.category))},
                          {"variant", constraints::variant_of(c.spec)},
                          {"loose", constraints::to_json(loose)},
                          {"strict", constraints::to_json(strict)}});
    }
  }
  write_file_atomic(vc.out, jsonl(rows));
  return "Checked " + std::to_string(rows.size()) + " (response, constraint) pairs: loose pass " +
         std::to_string(loose_pass) + ", strict pass " + std::to_string(strict_pass) + "; verdicts in " + vc.out +
         "\n";
}

std::string run(config::Command command, config::AppConfig config, const config::Overrides& overrides) {
  switch (command) {
    case config::Command::kBuildCorpus: return build_corpus(std::move(config), overrides);
    case config::Command::kJudge: return judge(std::move(config), overrides);
    case config::Command::kBench: return bench(std::move(config), overrides);
    case config::Command::kVerify: return verify(std::move(config), overrides);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown command");
}

}  // namespace pj::commands
