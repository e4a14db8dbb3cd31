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

#include "pairjudge/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#include "pairjudge/error.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pj::corpus {

std::string_view to_string(Task t) {
  switch (t) {
    case Task::kQuestionGenText: return "QuestionGenText";
    case Task::kQuestionGenCode: return "QuestionGenCode";
    case Task::kTextAnalysis: return "TextAnalysis";
    case Task::kCodeAnalysis: return "CodeAnalysis";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : kAllTasks) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

Json to_json(const TrainingSample& s) {
  Json parts = Json::array();
  for (const auto& p : s.prompt_parts) parts.push_back(Json::array({p.role, p.text}));
  Json prov{{"instruction_id", s.provenance.instruction_id},
            {"question_id", s.provenance.question_id},
            {"seed", s.provenance.seed}};
  if (s.provenance.constraint_category) {
    prov["constraint_category"] = std::string(pj::to_string(*s.provenance.constraint_category));
  }
  return Json{{"task", std::string(to_string(s.task))},
              {"prompt_parts", parts},
              {"target", s.target},
              {"hint", s.hint},
              {"provenance", prov}};
}

TrainingSample training_sample_from_json(const Json& j) {
  try {
    TrainingSample s;
    auto task = parse_task(j.at("task").get<std::string>());
    if (!task) throw Error(ErrorKind::kMalformedRecord, "unknown task " + j.at("task").dump());
    s.task = *task;
    for (const auto& p : j.at("prompt_parts")) {
      s.prompt_parts.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
    }
    s.target = j.at("target").get<std::string>();
    s.hint = j.at("hint").get<std::string>();
    const Json& prov = j.at("provenance");
    s.provenance.instruction_id = prov.at("instruction_id").get<std::string>();
    s.provenance.question_id = prov.at("question_id").get<std::string>();
    s.provenance.seed = prov.at("seed").get<std::uint64_t>();
    if (prov.contains("constraint_category")) {
      auto c = parse_category(prov["constraint_category"].get<std::string>());
      if (!c) throw Error(ErrorKind::kMalformedRecord, "unknown constraint category");
      s.provenance.constraint_category = *c;
    }
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kMalformedRecord, std::string("malformed training sample: ") + e.what());
  }
}

std::string enumerate_questions(const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + texts[i];
  }
  return out;
}

namespace {

gateway::ChatRequest with_attempt_seed(gateway::ChatRequest req, int attempt) {
  if (attempt > 0) req.params.seed = attempt;
  return req;
}

std::vector<std::string> texts_of(const std::vector<EvalQuestion>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(q.text);
  return out;
}

std::string joined_ids(const std::vector<EvalQuestion>& qs) {
  std::vector<std::string> ids;
  for (const auto& q : qs) ids.push_back(q.id);
  return text::join(ids, ",");
}

}  // namespace

std::vector<EvalQuestion> gen_type1_questions(const Instruction& x, const std::vector<std::string>& samples,
                                              gateway::Gateway& backend, int retry_budget) {
  if (!x.constraints.empty()) throw Error(ErrorKind::kInput, "type-1 questions need an unconstrained instruction");
  if (samples.size() != 3) throw Error(ErrorKind::kInput, "type-1 questions need 3 sample responses");
  auto prompt = gateway::render_prompt(gateway::TemplateId::kCorpusQuestionGen, {{"instruction", x.text},
                                                                                  {"sample_1", samples[0]},
                                                                                  {"sample_2", samples[1]},
                                                                                  {"sample_3", samples[2]}});
  std::size_t got = 0;
  for (int attempt = 0; attempt <= retry_budget; ++attempt) {
    auto parsed = parse_question_list(backend.complete(with_attempt_seed(prompt, attempt)));
    got = parsed.size();
    if (got == 3) {
      std::vector<EvalQuestion> out;
      for (const auto& t : parsed) out.push_back(make_textual_question(t));
      return out;
    }
  }
  throw Error(ErrorKind::kQuestionGen, "expected 3 questions for instruction " + x.id + ", got " + std::to_string(got));
}

std::optional<Label> parse_better_line(std::string_view reply) {
  static const std::regex re(R"(better\s*:\s*\**\s*response\s*([12]))", std::regex::icase);
  std::optional<Label> out;
  for (auto line : text::split_lines(reply)) {
    std::string l(line);
    std::smatch m;
    if (std::regex_search(l, m, re)) out = m[1] == "1" ? Label::kA : Label::kB;
  }
  return out;
}

std::string with_hint(std::string_view hint, std::string_view body) {
  if (body.substr(0, hint.size()) == hint) return std::string(body);
  return std::string(hint) + ".\n" + std::string(body);
}

TextAnalysisResult collect_text_analysis(const PreferencePair& pair, const std::vector<EvalQuestion>& questions,
                                         gateway::Gateway& backend) {
  for (const auto& q : questions) {
    if (q.kind != QuestionKind::kTextual) throw Error(ErrorKind::kInput, "text analysis takes textual questions only");
  }
  auto prompt = gateway::render_prompt(gateway::TemplateId::kCorpusTextAnalysis,
                                       {{"instruction", pair.instruction.text},
                                        {"response_1", pair.response_a},
                                        {"response_2", pair.response_b},
                                        {"questions", enumerate_questions(texts_of(questions))}});
  TextAnalysisResult r;
  r.raw = backend.complete(prompt);
  r.decision = parse_better_line(r.raw);
  if (!r.decision) {
    r.reason = "unparseable";
  } else if (*r.decision != pair.gold) {
    r.reason = "label_mismatch";
  } else {
    r.accepted = true;
    r.target = with_hint(kTextHint, text::trim(r.raw));
  }
  return r;
}

Json to_json(const Rejection& r) {
  return Json{{"instruction_id", r.instruction_id},
              {"question_id", r.question_id},
              {"stage", r.stage},
              {"reason", r.reason}};
}

std::vector<std::string> draw_extra_samples(const std::vector<std::string>& exclude, std::uint64_t rng_seed) {
  std::vector<std::string> eligible;
  for (const auto& s : scripts::sample_pool()) {
    if (std::find(exclude.begin(), exclude.end(), s) == exclude.end()) eligible.push_back(s);
  }
  if (eligible.size() < 3) throw Error(ErrorKind::kInput, "sample pool too small for held-out draw");
  Rng rng(rng_seed);
  rng.shuffle(eligible);
  eligible.resize(3);
  return eligible;
}

CodeBuildResult build_code_samples(const Instruction& x, std::uint64_t rng_seed,
                                   const std::vector<std::string>& sample_responses, gateway::Gateway& backend,
                                   sandbox::Sandbox& sandbox, const CodeSampleOptions& options) {
  if (!x.constraints.empty()) throw Error(ErrorKind::kInput, "code samples start from an unconstrained instruction");
  int positive = 0;
  for (const auto& [cat, w] : options.weights) {
    if (w > 0) ++positive;
  }
  Rng count_rng(derive_seed(rng_seed, "constraint-count"));
  int count = std::min<int>(1 + static_cast<int>(count_rng.below(3)), std::max(positive, 1));
  auto specs = constraints::sample_constraints(count, options.weights, derive_seed(rng_seed, "constraints"));

  CodeBuildResult out;
  out.x_prime = constraints::inject_constraints(x, specs, rng_seed);
  auto extras = draw_extra_samples(sample_responses, derive_seed(rng_seed, "extra-samples"));

  for (const auto& spec : specs) {
    EvalQuestion q = constraints::question_for(spec);
    auto reject = [&](const std::string& stage, const std::string& reason) {
      out.rejections.push_back({x.id, q.id, stage, reason});
      ++out.stage_rejections[stage];
    };
    scripts::VerificationScript script;
    try {
      script = scripts::generate_script(q, sample_responses, backend, options.script);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kGeneration) throw;
      reject("generation", e.what());
      continue;
    }
    auto outcome = scripts::validate_script(script, sample_responses, extras, sandbox, backend, options.validation);
    out.filter.add(outcome);
    out.script_records.push_back(scripts::script_record(script, outcome));
    if (outcome.accepted()) {
      out.accepted.push_back({out.x_prime, q, std::move(script), std::move(outcome)});
    } else {
      const auto& f = outcome.failures.back();
      reject(std::string(scripts::to_string(f.stage)), f.detail);
    }
  }
  return out;
}

CorpusStats::CorpusStats() {
  for (Task t : kAllTasks) tasks[t] = {};
  for (Category c : kAllCategories) histogram[c] = 0;
}

void CorpusStats::add(const TrainingSample& s) {
  auto& t = tasks[s.task];
  ++t.count;
  t.target_tokens += static_cast<std::int64_t>(text::count_words(s.target));
  if (s.provenance.constraint_category) ++histogram[*s.provenance.constraint_category];
}

void CorpusStats::merge(const CorpusStats& o) {
  for (const auto& [task, ts] : o.tasks) {
    tasks[task].count += ts.count;
    tasks[task].target_tokens += ts.target_tokens;
  }
  for (const auto& [c, n] : o.histogram) histogram[c] += n;
  filter.merge(o.filter);
  rejected_analyses += o.rejected_analyses;
}

TaskStats CorpusStats::total() const {
  TaskStats t;
  for (const auto& [task, ts] : tasks) {
    t.count += ts.count;
    t.target_tokens += ts.target_tokens;
  }
  return t;
}

CorpusStats compute_stats(const std::vector<TrainingSample>& samples) {
  CorpusStats stats;
  for (const auto& s : samples) stats.add(s);
  return stats;
}

CorpusStats emit_corpus(const std::vector<TrainingSample>& samples, const std::string& path) {
  const std::string tmp = path + ".tmp";
  CorpusStats stats;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + tmp + " for writing");
    for (const auto& s : samples) {
      out << to_json(s).dump() << '\n';
      stats.add(s);
    }
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw Error(ErrorKind::kIo, "write failed for " + path);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorKind::kIo, "cannot move corpus into " + path);
  }
  return stats;
}

namespace {

std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

std::string display_name(Category c) {
  switch (c) {
    case Category::kKeywords: return "Keywords";
    case Category::kLanguage: return "Language";
    case Category::kLengthConstraints: return "Length Constraints";
    case Category::kDetectableContent: return "Detectable Content";
    case Category::kDetectableFormat: return "Detectable Format";
    case Category::kChangeCases: return "Change Cases";
    case Category::kStartEndWith: return "Start with / End with";
    case Category::kPunctuation: return "Punctuation";
  }
  return "?";
}

std::string rate_cell(const Ratio& r) {
  std::string s = format_percent(r, 0);
  return s == "n/a" ? s : s + "%";
}

std::string pct_cell(std::int64_t num, std::int64_t den) {
  std::string s = format_percent(num, den, 1);
  return s == "n/a" ? s : s + "%";
}

}  // namespace

std::string stats_report(const CorpusStats& stats) {
  std::ostringstream o;
  auto row3 = [&](const std::string& a, const std::string& b, const std::string& c) {
    o << pad_right(a, 34) << pad_left(b, 10) << pad_left(c, 16) << '\n';
  };
  auto avg = [](const TaskStats& t) { return format_fixed(t.target_tokens, t.count, 1); };

  TaskStats questions = stats.tasks.at(Task::kQuestionGenText);
  questions.count += stats.tasks.at(Task::kQuestionGenCode).count;
  questions.target_tokens += stats.tasks.at(Task::kQuestionGenCode).target_tokens;

  row3("Training samples", "Quantity", "Average length");
  TaskStats total = stats.total();
  row3("Total", std::to_string(total.count), avg(total));
  const TaskStats& ta = stats.tasks.at(Task::kTextAnalysis);
  const TaskStats& ca = stats.tasks.at(Task::kCodeAnalysis);
  row3("- Text analysis samples", std::to_string(ta.count), avg(ta));
  row3("- Python script samples", std::to_string(ca.count), avg(ca));
  row3("- Evaluation question samples", std::to_string(questions.count), avg(questions));
  o << '\n';

  std::int64_t hist_total = 0;
  for (const auto& [c, n] : stats.histogram) hist_total += n;
  row3("Constraint type", "Count", "Percentage");
  for (Category c : kAllCategories) {
    auto it = stats.histogram.find(c);
    std::int64_t n = it == stats.histogram.end() ? 0 : it->second;
    row3(display_name(c), std::to_string(n), pct_cell(n, hist_total));
  }
  row3("Total", std::to_string(hist_total), pct_cell(hist_total, hist_total));
  o << '\n';

  auto row2 = [&](const std::string& a, const std::string& b) { o << pad_right(a, 44) << pad_left(b, 16) << '\n'; };
  row2("Filtering", "Remaining rate");
  row2("Check 1 (execute with prompt samples)", rate_cell(stats.filter.remaining(scripts::Stage::kCheck1)));
  row2("Check 2 (execute with held-out samples)", rate_cell(stats.filter.remaining(scripts::Stage::kCheck2)));
  row2("Reverse validation", rate_cell(stats.filter.remaining(scripts::Stage::kReverse)));
  o << '\n';
  o << "Rejected text analyses: " << stats.rejected_analyses << '\n';
  return o.str();
}

Json to_json(const CorpusStats& stats) {
  Json tasks = Json::object();
  for (const auto& [t, ts] : stats.tasks) {
    tasks[std::string(to_string(t))] = {{"count", ts.count},
                                        {"target_tokens", ts.target_tokens},
                                        {"average_length", format_fixed(ts.target_tokens, ts.count, 1)}};
  }
  Json hist = Json::object();
  for (const auto& [c, n] : stats.histogram) hist[std::string(pj::to_string(c))] = n;
  Json filter = scripts::to_json(stats.filter);
  filter["remaining"] = {{"check1", rate_cell(stats.filter.remaining(scripts::Stage::kCheck1))},
                         {"check2", rate_cell(stats.filter.remaining(scripts::Stage::kCheck2))},
                         {"reverse", rate_cell(stats.filter.remaining(scripts::Stage::kReverse))}};
  return Json{{"tasks", tasks},
              {"histogram", hist},
              {"filter", filter},
              {"rejected_analyses", stats.rejected_analyses},
              {"table", stats_report(stats)}};
}

std::vector<std::string> sample_responses_of(const PreferencePair& pair, const std::string& key) {
  if (!pair.extra.contains(key)) throw Error(ErrorKind::kInput, "record " + pair.id + " lacks " + key);
  const Json& v = pair.extra.at(key);
  if (!v.is_array() || v.size() != 3) {
    throw Error(ErrorKind::kInput, "record " + pair.id + ": " + key + " must hold 3 strings");
  }
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw Error(ErrorKind::kInput, "record " + pair.id + ": " + key + " must hold 3 strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

namespace {

struct PairOutput {
  std::vector<TrainingSample> samples;
  std::vector<Rejection> rejections;
  std::vector<Json> script_records;
  scripts::FilterStats filter;
  std::int64_t rejected_analyses = 0;
  std::exception_ptr failure;
};

PairOutput process_pair(const PreferencePair& pair, gateway::Gateway& backend, sandbox::Sandbox& sandbox,
                        const CorpusOptions& options) {
  PairOutput out;
  const Instruction& x = pair.instruction;
  auto samples = sample_responses_of(pair);

  try {
    auto questions = gen_type1_questions(x, samples, backend, options.question_retry_budget);
    TrainingSample qs;
    qs.task = Task::kQuestionGenText;
    qs.prompt_parts = {{"instruction", x.text}};
    qs.target = enumerate_questions(texts_of(questions));
    qs.provenance = {x.id, joined_ids(questions), options.seed, std::nullopt};
    out.samples.push_back(std::move(qs));

    auto analysis = collect_text_analysis(pair, questions, backend);
    if (analysis.accepted) {
      TrainingSample ts;
      ts.task = Task::kTextAnalysis;
      ts.prompt_parts = {{"instruction", x.text},
                         {"response_1", pair.response_a},
                         {"response_2", pair.response_b},
                         {"questions", enumerate_questions(texts_of(questions))}};
      ts.target = analysis.target;
      ts.hint = std::string(kTextHint);
      ts.provenance = {x.id, joined_ids(questions), options.seed, std::nullopt};
      out.samples.push_back(std::move(ts));
    } else {
      ++out.rejected_analyses;
      out.rejections.push_back({x.id, joined_ids(questions), "text_analysis", analysis.reason});
    }
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::kData) throw;
    out.rejections.push_back({x.id, "", e.kind() == ErrorKind::kQuestionGen ? "question_gen" : "text_analysis", e.what()});
  }

  if (options.code_samples) try {
    std::uint64_t seed = derive_seed(options.seed, "code-samples:" + pair.id);
    auto code_samples = pair.extra.contains("code_sample_responses")
                            ? sample_responses_of(pair, "code_sample_responses")
                            : samples;
    auto built = build_code_samples(x, seed, code_samples, backend, sandbox, options.code);

    std::vector<EvalQuestion> questions;
    for (const auto& spec : built.x_prime.constraints) questions.push_back(constraints::question_for(spec));
    TrainingSample qc;
    qc.task = Task::kQuestionGenCode;
    qc.prompt_parts = {{"instruction", built.x_prime.text}};
    qc.target = enumerate_questions(texts_of(questions));
    qc.provenance = {x.id, joined_ids(questions), seed, std::nullopt};
    out.samples.push_back(std::move(qc));

    for (const auto& t : built.accepted) {
      TrainingSample cs;
      cs.task = Task::kCodeAnalysis;
      cs.prompt_parts = {{"instruction", t.x_prime.text}, {"question", t.question.text}};
      cs.target = std::string(kCodeHint) + "\n" + scripts::render_fence(t.script.source, t.script.dialect);
      cs.hint = std::string(kCodeHint);
      cs.provenance = {x.id, t.question.id, seed, t.question.constraint->category};
      out.samples.push_back(std::move(cs));
    }
    out.rejections.insert(out.rejections.end(), built.rejections.begin(), built.rejections.end());
    out.script_records = std::move(built.script_records);
    out.filter = built.filter;
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::kData) throw;
    out.rejections.push_back({x.id, "", "code_samples", e.what()});
  }
  return out;
}

}  // namespace

CorpusRun run_corpus(const std::vector<PreferencePair>& pairs, gateway::Gateway& backend, sandbox::Sandbox& sandbox,
                     const CorpusOptions& options) {
  for (const auto& p : pairs) {
    if (!p.instruction.constraints.empty()) {
      throw Error(ErrorKind::kInput, "record " + p.id + ": corpus instructions must be unconstrained");
    }
    sample_responses_of(p);
    if (p.extra.contains("code_sample_responses")) sample_responses_of(p, "code_sample_responses");
  }

  std::vector<PairOutput> outputs(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        outputs[i] = process_pair(pairs[i], backend, sandbox, options);
      } catch (...) {
        outputs[i].failure = std::current_exception();
      }
    }
  };
  std::size_t n_threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.workers, 1)), 1,
                                                  std::max<std::size_t>(pairs.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  CorpusRun run;
  for (auto& o : outputs) {
    if (o.failure) std::rethrow_exception(o.failure);
  }
  for (auto& o : outputs) {
    run.samples.insert(run.samples.end(), o.samples.begin(), o.samples.end());
    run.rejections.insert(run.rejections.end(), o.rejections.begin(), o.rejections.end());
    run.script_records.insert(run.script_records.end(), o.script_records.begin(), o.script_records.end());
    run.filter.merge(o.filter);
    run.rejected_analyses += o.rejected_analyses;
  }
  if (options.shuffle) {
    Rng rng(derive_seed(options.seed, "shuffle"));
    rng.shuffle(run.samples);
  }
  return run;
}

}  // namespace pj::corpus
