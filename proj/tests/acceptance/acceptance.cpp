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


// Acceptance gates. Prints one PASS/FAIL line per gate and exits non-zero
// when any gate fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "judge_fixture.hpp"
#include "native_sandbox.hpp"
#include "oracle_backend.hpp"
#include "pairjudge/constraints.hpp"
#include "pairjudge/corpus.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/metrics.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/scripts.hpp"
#include "pairjudge/text.hpp"

namespace {

using namespace pj;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Collects failed expectations for one gate.
class Gate {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += "\n    " + f;
    if (failed_ > static_cast<int>(failures_.size())) s += "\n    ...";
    return s;
  }

 private:
  std::vector<std::string> failures_;
  int failed_ = 0;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / ("pj_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string report_line(const std::string& report, const std::string& prefix) {
  for (auto l : text::split_lines(report)) {
    if (l.substr(0, prefix.size()) == prefix) return std::string(l);
  }
  return {};
}

std::string last_token(const std::string& line) {
  auto w = text::words(line);
  return w.empty() ? std::string() : std::string(w.back());
}

// Constraint checks agree with the independently derived table, and strict
// passes are always loose passes.
void constraint_oracle(Gate& g) {
  auto start = Clock::now();
  std::ifstream in(std::string(PJ_FIXTURE_DIR) + "/constraint_oracle.jsonl");
  std::map<std::string, std::map<std::string, int>> counts;
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    ++rows;
    Json row = Json::parse(line);
    auto spec = constraint_spec_from_json(row["spec"]);
    auto mode = row["mode"] == "loose" ? constraints::CheckMode::kLoose : constraints::CheckMode::kStrict;
    auto got = constraints::to_json(constraints::check(row["response"].get<std::string>(), spec, mode));
    g.expect(got["pass"] == row["expect_pass"] && got["detail"] == row["expect_detail"],
             "oracle mismatch: " + row.dump() + " got " + got.dump());
    ++counts[row["spec"]["category"].get<std::string>()][row["mode"].get<std::string>()];
  }
  g.expect(counts.size() == 8, "fixture covers " + std::to_string(counts.size()) + " categories");
  for (const auto& [cat, modes] : counts) {
    for (const char* m : {"strict", "loose"}) {
      int n = modes.count(m) ? modes.at(m) : 0;
      g.expect(n >= 20, cat + " has " + std::to_string(n) + " " + m + " cases");
    }
  }

  const std::vector<std::string> pieces = {
      "Sure, here it is:", "**", "*", "_", "Thank you.", "Let me know if you need anything.", "ocean", "OCEAN",
      "[name]", "P.S.", "* item", "- item", "<<Title>>", "\n", "\n\n", " ", ",", "!", "\"", "{\"a\": 1}",
      "Hello", "Dear team,", "word", "Привет", "你好", "garden", "very", ":", "-", "Any other questions?"};
  std::vector<ConstraintSpec> specs;
  for (std::uint64_t s = 0; s < 64; ++s) {
    for (Category c : kAllCategories) {
      for (const auto& x : constraints::sample_constraints(1, {{c, 1.0}}, s)) specs.push_back(x);
    }
  }
  Rng rng(777);
  int strict_passes = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string response;
    auto n = rng.below(12);
    for (std::uint64_t k = 0; k < n; ++k) {
      response += pieces[rng.below(pieces.size())];
      if (rng.below(3)) response += " ";
    }
    const auto& s = specs[rng.below(specs.size())];
    bool strict = constraints::check(response, s, constraints::CheckMode::kStrict).pass;
    if (!strict) continue;
    ++strict_passes;
    g.expect(constraints::check(response, s, constraints::CheckMode::kLoose).pass,
             "strict pass but loose fail: " + to_json(s).dump());
  }
  g.expect(strict_passes > 500, "too few strict passes in the random draws: " + std::to_string(strict_passes));
  double t = seconds_since(start);
  g.expect(t < 10.0, "took " + std::to_string(t) + " s");
  std::printf("  %d fixture rows, %d strict passes in 10000 draws, %.2f s\n", rows, strict_passes, t);
}

// The judge command replays the recorded fixture byte for byte.
void deterministic_judge(Gate& g) {
  auto start = Clock::now();
  auto dir = scratch_dir();
  std::string golden = std::string(text::trim(slurp(pj::testing::judge_fixture_dir() + "/golden_digest.txt")));
  std::string first;
  for (int run = 0; run < 3; ++run) {
    auto out = (dir / ("records_" + std::to_string(run) + ".jsonl")).string();
    pj::testing::run_judge_fixture(out);
    std::string bytes = slurp(out);
    if (run == 0) first = bytes;
    g.expect(bytes == first, "run " + std::to_string(run) + " differs from run 0");
    g.expect(pj::testing::file_digest(out) == golden,
             "digest " + pj::testing::file_digest(out) + " != golden " + golden);
  }
  g.expect(std::count(first.begin(), first.end(), '\n') == 10, "expected 10 records");
  double t = seconds_since(start);
  g.expect(t < 30.0, "took " + std::to_string(t) + " s");
  std::printf("  3 runs, digest %s, %.2f s\n", golden.c_str(), t);
}

judge::JudgeRecord record(Label gold, std::optional<Label> original, std::optional<Label> swapped) {
  judge::JudgeRecord r;
  r.gold = gold;
  r.original.verdict.choice = original;
  r.swapped.verdict.order = judge::Order::kSwapped;
  r.swapped.verdict.choice = swapped;
  return r;
}

void metrics_arithmetic(Gate& g) {
  std::vector<judge::JudgeRecord> recs = {
      record(Label::kA, Label::kA, Label::kA), record(Label::kA, Label::kA, Label::kB),
      record(Label::kA, Label::kB, Label::kB), record(Label::kA, Label::kA, Label::kA)};
  auto acc = metrics::accuracy(recs);
  g.expect(acc.original == Ratio{3, 4}, "original accuracy");
  g.expect(acc.swapped == Ratio{2, 4}, "swapped accuracy");
  g.expect(acc.acc() == Ratio{5, 8} && acc.acc().value() == 0.625, "mean accuracy");
  g.expect(metrics::agreement(recs) == Ratio{3, 4}, "agreement");

  metrics::MetricsReport report;
  for (std::int64_t permille : {810, 824, 785, 783, 682}) {
    metrics::SubsetMetrics s;
    s.acc.original = {permille, 1000};
    s.acc.swapped = {permille, 1000};
    report.subsets.push_back(s);
  }
  std::string ave = metrics::percent(report.ave());
  g.expect(ave == "77.7", "Ave rendered " + ave);

  Rng rng(31337);
  auto pick = [&]() -> std::optional<Label> {
    auto v = rng.below(3);
    if (v == 2) return std::nullopt;
    return v == 0 ? Label::kA : Label::kB;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<judge::JudgeRecord> set;
    auto n = 1 + rng.below(30);
    std::int64_t pre_correct = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      auto r = record(rng.below(2) ? Label::kA : Label::kB, pick(), pick());
      r.original.pre_refine = judge::JudgeVerdict{};
      r.original.pre_refine->choice = pick();
      r.swapped.pre_refine = judge::JudgeVerdict{};
      r.swapped.pre_refine->choice = pick();
      pre_correct += (r.original.pre_refine->choice == r.gold) + (r.swapped.pre_refine->choice == r.gold);
      set.push_back(r);
    }
    auto rc = metrics::refine_change(set);
    auto post = metrics::accuracy(set).acc();
    g.expect(rc && rc->wc.den == post.den && rc->wc.num - rc->cw.num == post.num - pre_correct,
             "wc - cw identity broken in trial " + std::to_string(trial));
  }
  std::printf("  (3/4, 2/4, 5/8), Ave %s, identity over 1000 sets\n", ave.c_str());
}

// 20 good scripts plus one planted defect per stage.
void filtering_pipeline(Gate& g) {
  EvalQuestion q = constraints::question_for(
      {Category::kLengthConstraints,
       {{"unit", std::string("words")}, {"relation", std::string("at_most")}, {"n", std::int64_t{80}}}});
  const std::vector<std::string> prompt = {"A short answer.", "Another reply with more words in it.", "Third."};
  auto drawn = corpus::draw_extra_samples(prompt, 2024);
  const std::vector<std::string> extras = {drawn[0], "", drawn[1]};

  struct Planted {
    std::string name;
    std::string behavior;
    bool mismatched = false;
    std::string expect_stage;  // empty for good scripts
  };
  std::vector<Planted> batch;
  const char* good[] = {"word_count", "char_count", "echo"};
  for (int i = 0; i < 20; ++i) batch.push_back({"good" + std::to_string(i), good[i % 3], false, ""});
  batch.insert(batch.begin() + 5, {"non_executing", "always_crash", false, "check1"});
  batch.insert(batch.begin() + 12, {"non_generalizing", "divide_by_length", false, "check2"});
  batch.insert(batch.begin() + 17, {"purpose_mismatch", "word_count", true, "reverse"});

  pj::testing::OracleRules consistent;
  pj::testing::OracleRules mismatch;
  mismatch.consistency = "The function counts words, which does not answer the question.\nINCONSISTENT";
  auto ok_gw = pj::testing::make_test_gateway(pj::testing::make_oracle_backend(consistent));
  auto bad_gw = pj::testing::make_test_gateway(pj::testing::make_oracle_backend(mismatch));
  pj::testing::NativeSandbox sb;

  scripts::FilterStats stats;
  std::map<std::string, int> per_stage;
  for (const auto& p : batch) {
    auto script = scripts::make_script(pj::testing::behavior_source(p.behavior), "python", q);
    auto outcome = scripts::validate_script(script, prompt, extras, sb, p.mismatched ? *bad_gw : *ok_gw);
    stats.add(outcome);
    std::string stage = outcome.accepted() ? "" : std::string(scripts::to_string(outcome.failures.back().stage));
    if (!stage.empty()) ++per_stage[stage];
    g.expect(stage == p.expect_stage, p.name + " rejected at '" + stage + "', planted '" + p.expect_stage + "'");
  }
  g.expect(stats == scripts::FilterStats{23, 22, 21, 20}, "filter counts " + scripts::to_json(stats).dump());
  g.expect(per_stage == std::map<std::string, int>{{"check1", 1}, {"check2", 1}, {"reverse", 1}},
           "per-stage rejections");

  corpus::CorpusStats cs;
  cs.filter = stats;
  auto report = corpus::stats_report(cs);
  g.expect(last_token(report_line(report, "Check 1")) == "96%", "check 1 line: " + report_line(report, "Check 1"));
  g.expect(last_token(report_line(report, "Check 2")) == "95%", "check 2 line: " + report_line(report, "Check 2"));
  g.expect(last_token(report_line(report, "Reverse")) == "95%", "reverse line: " + report_line(report, "Reverse"));

  corpus::CorpusStats table;
  table.filter = {100, 100, 99, 93};
  auto fixture = corpus::stats_report(table);
  std::string rates = last_token(report_line(fixture, "Check 1")) + "/" + last_token(report_line(fixture, "Check 2")) +
                      "/" + last_token(report_line(fixture, "Reverse"));
  g.expect(rates == "100%/99%/94%", "table fixture renders " + rates);
  std::printf("  23 scripts -> %lld/%lld/%lld/%lld, table fixture %s\n", static_cast<long long>(stats.total),
              static_cast<long long>(stats.passed_check1), static_cast<long long>(stats.passed_check2),
              static_cast<long long>(stats.passed_reverse), rates.c_str());
}

std::string random_text(Rng& rng, int min_words, int max_words) {
  static const std::vector<std::string> vocab = {"river", "stone", "quiet", "light", "north", "market", "bread",
                                                 "window", "green", "slow", "clock", "paper", "field", "bright",
                                                 "music", "harbor", "winter", "garden", "letter", "road"};
  std::string s;
  auto n = min_words + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_words - min_words + 1)));
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng.below(vocab.size())];
  return s + ".";
}

// A slot-blind oracle gives Agr = 1 and Acc equal to its own accuracy.
void swap_correctness(Gate& g) {
  pj::testing::OracleRules rules;
  rules.score = [](const std::string& instruction, const std::string& r) {
    return static_cast<double>(fnv1a64(instruction + "\x1f" + r) % 1000);
  };
  Rng rng(500500);
  std::vector<PreferencePair> pairs;
  std::int64_t oracle_correct = 0;
  for (int i = 0; i < 500; ++i) {
    PreferencePair p;
    p.id = "s" + std::to_string(i);
    p.instruction = {p.id, "Write about " + random_text(rng, 1, 3), {}};
    p.response_a = random_text(rng, 3, 12);
    do {
      p.response_b = random_text(rng, 3, 12);
    } while (p.response_b == p.response_a);
    p.gold = rng.below(2) ? Label::kA : Label::kB;
    int c = pj::testing::oracle_choice(rules, p.instruction.text, p.response_a, p.response_b);
    oracle_correct += (c == 1 ? Label::kA : Label::kB) == p.gold;
    pairs.push_back(p);
  }
  judge::RunConfig rc;
  rc.analyzer = pj::testing::make_test_gateway(pj::testing::make_oracle_backend(rules));
  rc.seed = 5;
  sandbox::StubSandbox stub;
  auto records = judge::judge_all(pairs, rc, stub);
  auto acc = metrics::accuracy(records);
  auto agr = metrics::agreement(records);
  g.expect(agr == Ratio{500, 500}, "Agr " + std::to_string(agr.num) + "/500");
  g.expect(acc.original == Ratio{oracle_correct, 500}, "original Acc differs from the oracle");
  g.expect(acc.swapped == Ratio{oracle_correct, 500}, "swapped Acc differs from the oracle");
  std::printf("  500 pairs, Agr %lld/500, Acc %lld/500 in both orders\n", static_cast<long long>(agr.num),
              static_cast<long long>(oracle_correct));
}

void multi_round(Gate& g) {
  const std::map<std::int64_t, std::string> replies = {
      {40, "1. A?\n2. B?\n3. C?"}, {41, "1. B?\n2. C?\n3. D?"}, {42, "1. C?\n2. D?\n3. E?"}, {43, "1. A?\n2. E?\n3. F?"}};
  std::vector<gateway::ChatRequest> seen;
  std::mutex mu;
  judge::RunConfig rc;
  rc.rounds_k = 4;
  rc.seed = 40;
  rc.analyzer = pj::testing::make_test_gateway(std::make_shared<gateway::CallbackBackend>(
      [&](const gateway::ChatRequest& r) {
        std::lock_guard<std::mutex> lock(mu);
        seen.push_back(r);
        return r.params.seed ? replies.at(*r.params.seed) : replies.at(40);
      },
      "rounds"));
  Instruction x{"x", "Plan a picnic.", {}};
  std::vector<std::string> got;
  for (const auto& q : judge::propose_questions(x, rc)) got.push_back(q.text);
  g.expect(got == std::vector<std::string>{"A?", "B?", "C?", "D?", "E?", "F?"}, "k=4 union: " + text::join(got, " "));
  g.expect(std::set<std::string>(got.begin(), got.end()).size() == got.size(), "duplicates in the union");
  for (const auto& r : seen) g.expect(r.params.temperature == 0.2, "k=4 rounds must sample at temperature 0.2");

  seen.clear();
  rc.rounds_k = 1;
  std::vector<std::string> single;
  for (const auto& q : judge::propose_questions(x, rc)) single.push_back(q.text);
  g.expect(single == parse_question_list(replies.at(40)), "k=1 differs from the single-round set");
  g.expect(seen.size() == 1 && seen[0].params.temperature == 0.0 && !seen[0].params.seed,
           "k=1 must be one unseeded request at temperature 0");
  std::printf("  k=4 -> %s; k=1 -> %s\n", text::join(got, " ").c_str(), text::join(single, " ").c_str());
}

std::vector<PreferencePair> corpus_pairs() {
  std::vector<PreferencePair> out;
  Rng rng(99);
  for (int i = 0; i < 8; ++i) {
    PreferencePair p;
    p.id = "c" + std::to_string(i);
    p.instruction = {p.id, "Describe " + random_text(rng, 1, 2), {}};
    p.response_a = random_text(rng, 4, 16);
    p.response_b = random_text(rng, 4, 16);
    p.gold = rng.below(2) ? Label::kA : Label::kB;
    p.extra = Json{{"sample_responses", {random_text(rng, 2, 6), random_text(rng, 2, 6), random_text(rng, 2, 6)}}};
    out.push_back(p);
  }
  return out;
}

void corpus_format(Gate& g) {
  auto pairs = corpus_pairs();
  std::map<std::string, Label> gold;
  for (const auto& p : pairs) gold[p.id] = p.gold;
  auto gw = pj::testing::make_test_gateway(pj::testing::make_oracle_backend());
  pj::testing::NativeSandbox sb;
  corpus::CorpusOptions opts;
  opts.seed = 8;
  auto run = corpus::run_corpus(pairs, *gw, sb, opts);
  auto path = (scratch_dir() / "corpus.jsonl").string();
  corpus::emit_corpus(run.samples, path);

  std::map<corpus::Task, int> counts;
  std::ifstream in(path, std::ios::binary);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto where = "line " + std::to_string(line_no) + ": ";
    Json j = Json::parse(line);
    auto s = corpus::training_sample_from_json(j);
    g.expect(corpus::to_json(s).dump() == line, where + "does not re-serialize identically");
    ++counts[s.task];
    switch (s.task) {
      case corpus::Task::kTextAnalysis: {
        g.expect(s.hint == corpus::kTextHint, where + "text hint");
        g.expect(s.target.rfind(std::string(corpus::kTextHint), 0) == 0, where + "target lacks the text hint");
        auto label = corpus::parse_better_line(s.target);
        g.expect(label && *label == gold.at(s.provenance.instruction_id), where + "label disagrees with gold");
        break;
      }
      case corpus::Task::kCodeAnalysis: {
        g.expect(s.hint == corpus::kCodeHint, where + "code hint");
        g.expect(s.target.rfind(std::string(corpus::kCodeHint) + "\n", 0) == 0, where + "target lacks the code hint");
        g.expect(s.provenance.constraint_category.has_value(), where + "missing category");
        try {
          scripts::find_entry_name(scripts::extract_fenced_code(s.target, "python"));
        } catch (const Error& e) {
          g.expect(false, where + e.what());
        }
        break;
      }
      default:
        g.expect(s.hint.empty(), where + "question samples carry no hint");
        g.expect(!parse_question_list(s.target).empty(), where + "no questions in target");
    }
  }
  g.expect(line_no == static_cast<int>(run.samples.size()), "line count");
  g.expect(counts[corpus::Task::kQuestionGenText] == 8 && counts[corpus::Task::kQuestionGenCode] == 8,
           "question samples per pair");
  g.expect(counts[corpus::Task::kTextAnalysis] + run.rejected_analyses == 8, "text analyses accounted for");
  g.expect(counts[corpus::Task::kCodeAnalysis] > 0, "no code samples");

  corpus::CorpusStats table;
  const std::map<Category, std::int64_t> published = {
      {Category::kKeywords, 1983},          {Category::kLanguage, 303},         {Category::kLengthConstraints, 1193},
      {Category::kDetectableContent, 627}, {Category::kDetectableFormat, 1035}, {Category::kChangeCases, 374},
      {Category::kStartEndWith, 1741},      {Category::kPunctuation, 316}};
  for (const auto& [c, n] : published) table.histogram[c] = n;
  auto report = corpus::stats_report(table);
  auto keywords = report_line(report, "Keywords");
  g.expect(last_token(keywords) == "26.2%", "keywords line: " + keywords);
  g.expect(text::words(report_line(report, "Total")).size() >= 2, "total line");
  std::printf("  %d lines re-parsed (%d text, %d code), Keywords %s\n", line_no,
              counts[corpus::Task::kTextAnalysis], counts[corpus::Task::kCodeAnalysis], last_token(keywords).c_str());
}

// The primary pipelines with the sandbox replaced by the stub.
void stub_sandbox(Gate& g) {
  sandbox::StubSandbox stub;
  auto out = (scratch_dir() / "stub_records.jsonl").string();
  pj::testing::run_judge_fixture(out);
  int degraded = 0;
  int code = 0;
  std::ifstream in(out);
  for (std::string line; std::getline(in, line);) {
    auto rec = judge::judge_record_from_json(Json::parse(line));
    for (const auto* o : {&rec.original, &rec.swapped}) {
      g.expect(o->verdict.choice.has_value(), rec.pair_id + " has no verdict");
      for (const auto& b : o->bundles) {
        if (b.mode == judge::AnalysisMode::kCode) ++code;
        if (b.body.rfind("[verification unavailable: ", 0) == 0) ++degraded;
      }
    }
  }
  g.expect(code == 0, "code bundles with the stub");
  g.expect(degraded > 0, "no degraded verifiable questions in the fixture");

  auto gw = pj::testing::make_test_gateway(pj::testing::make_oracle_backend());
  corpus::CorpusOptions opts;
  opts.seed = 8;
  auto run = corpus::run_corpus(corpus_pairs(), *gw, stub, opts);
  int text_samples = 0;
  for (const auto& s : run.samples) {
    g.expect(s.task != corpus::Task::kCodeAnalysis, "code sample produced without a sandbox");
    text_samples += s.task == corpus::Task::kTextAnalysis;
  }
  g.expect(text_samples > 0, "text path produced nothing");
  g.expect(run.filter.total > 0 && run.filter.passed_check1 == 0, "stub scripts must fail Check-1");
  std::printf("  judge fixture: %d degraded bundles; corpus: %d text samples, %lld scripts rejected\n", degraded,
              text_samples, static_cast<long long>(run.filter.total));
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Gate&)> run;
  };
  const Criterion criteria[] = {
      {"constraint-oracle-equivalence", constraint_oracle},
      {"deterministic-end-to-end", deterministic_judge},
      {"metrics-arithmetic", metrics_arithmetic},
      {"filtering-pipeline", filtering_pipeline},
      {"swap-correctness", swap_correctness},
      {"multi-round-sampling", multi_round},
      {"corpus-format", corpus_format},
      {"stub-sandbox", stub_sandbox},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Gate g;
    try {
      c.run(g);
    } catch (const std::exception& e) {
      g.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %s%s\n", g.ok() ? "PASS" : "FAIL", c.name, g.ok() ? "" : g.summary().c_str());
    std::fflush(stdout);
    failed += !g.ok();
  }
  fs::remove_all(fs::temp_directory_path() / ("pj_acceptance_" + std::to_string(::getpid())));
  return failed == 0 ? 0 : 1;
}
