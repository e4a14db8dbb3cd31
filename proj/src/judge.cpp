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

#include "pairjudge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <regex>
#include <set>
#include <thread>

#include "pairjudge/constraints.hpp"
#include "pairjudge/corpus.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pj::judge {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kFull: return "full";
    case Mode::kNoRefine: return "no-refine";
    case Mode::kNoFT: return "no-ft";
    case Mode::kNoFTNoMF: return "no-ft-no-mf";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
  for (Mode m : {Mode::kFull, Mode::kNoRefine, Mode::kNoFT, Mode::kNoFTNoMF}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view to_string(Order o) { return o == Order::kOriginal ? "original" : "swapped"; }

std::string_view to_string(AnalysisMode m) { return m == AnalysisMode::kText ? "text" : "code"; }

double RunConfig::effective_question_temperature() const {
  return question_temperature.value_or(rounds_k > 1 ? 0.2 : 0.0);
}

gateway::Gateway& RunConfig::analysis_backend() const {
  if (mode == Mode::kNoFT || mode == Mode::kNoFTNoMF) return refiner_backend();
  if (!analyzer) throw Error(ErrorKind::kConfig, "no analyzer backend configured");
  return *analyzer;
}

gateway::Gateway& RunConfig::refiner_backend() const {
  if (refiner) return *refiner;
  if (!analyzer) throw Error(ErrorKind::kConfig, "no refiner backend configured");
  return *analyzer;
}

std::size_t ScriptCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return slots_.size();
}

namespace {

gateway::ChatRequest with_attempt_seed(gateway::ChatRequest req, int attempt) {
  if (attempt > 0) req.params.seed = attempt;
  return req;
}

Label to_choice(Label winner, Order order) { return order == Order::kOriginal ? winner : flip(winner); }

JudgeVerdict make_verdict(Order order, std::optional<Label> winner, std::string raw, std::string error_if_none) {
  JudgeVerdict v;
  v.order = order;
  v.raw_refiner_text = std::move(raw);
  if (winner) {
    v.winner = winner;
    v.choice = to_choice(*winner, order);
  } else {
    v.error = std::move(error_if_none);
  }
  return v;
}

JudgeVerdict error_verdict(Order order, std::string message) {
  JudgeVerdict v;
  v.order = order;
  v.error = std::move(message);
  return v;
}

}  // namespace

std::vector<EvalQuestion> propose_questions(const Instruction& x, const RunConfig& config) {
  if (config.rounds_k < 1) throw Error(ErrorKind::kConfig, "rounds must be at least 1");
  std::vector<EvalQuestion> out;
  std::set<std::string> seen;
  auto add = [&](EvalQuestion q) {
    if (seen.insert(normalize_question(q.text)).second) out.push_back(std::move(q));
  };
  for (const auto& spec : x.constraints) add(constraints::question_for(spec));

  gateway::Gateway& backend = config.analysis_backend();
  auto prompt = gateway::render_prompt(gateway::TemplateId::kAnalyzerQuestionGen, {{"instruction", x.text}});
  prompt.params.temperature = config.effective_question_temperature();
  bool parsed_any = false;
  for (int r = 0; r < config.rounds_k; ++r) {
    auto req = prompt;
    if (config.rounds_k > 1) req.params.seed = static_cast<std::int64_t>(config.seed) + r;
    auto texts = parse_question_list(backend.complete(req));
    if (config.questions_per_round > 0 && texts.size() > static_cast<std::size_t>(config.questions_per_round)) {
      texts.resize(static_cast<std::size_t>(config.questions_per_round));
    }
    parsed_any = parsed_any || !texts.empty();
    for (const auto& t : texts) {
      if (auto spec = constraints::parse_verifiable_question(t)) {
        add(constraints::question_for(*spec));
      } else {
        add(make_textual_question(t));
      }
    }
  }
  if (!parsed_any && out.empty()) {
    throw Error(ErrorKind::kQuestionGen, "no parseable questions in " + std::to_string(config.rounds_k) + " rounds");
  }
  return out;
}

namespace {

AnalysisBundle text_bundle(const PreferencePair& pair, const EvalQuestion& q, const RunConfig& config,
                           const std::string& note) {
  auto prompt = gateway::render_prompt(gateway::TemplateId::kAnalyzerAnalysis,
                                       {{"instruction", pair.instruction.text},
                                        {"response_1", pair.response_a},
                                        {"response_2", pair.response_b},
                                        {"question", q.text},
                                        {"hint", std::string(corpus::kTextHint)}});
  std::string reply = config.analysis_backend().complete(prompt);
  AnalysisBundle b;
  b.question = q;
  b.mode = AnalysisMode::kText;
  b.body = note.empty() ? reply : note + "\n" + reply;
  return b;
}

ScriptCache::Entry make_judge_script(const EvalQuestion& q, const RunConfig& config, sandbox::Sandbox& sandbox) {
  ScriptCache::Entry entry;
  scripts::VerificationScript script;
  try {
    auto prompt = gateway::render_prompt(gateway::TemplateId::kAnalyzerCodeGen,
                                         {{"question", q.text}, {"hint", std::string(corpus::kCodeHint)}});
    script = scripts::generate_script_from(prompt, q, config.analysis_backend(),
                                           {config.retry_budget, sandbox.dialect()});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kGeneration) throw;
    entry.failure = "script generation failed";
    return entry;
  }
  // A judge-time script must run on held-out responses before it is trusted.
  auto probes = corpus::draw_extra_samples({}, derive_seed(config.seed, "judge-probe:" + q.id));
  for (const auto& probe : probes) {
    auto r = sandbox.execute({script.source, script.entry_name, probe, config.limits});
    if (!r.ok()) {
      entry.failure = "script failed on a held-out response (" + sandbox::render_feedback(r) + ")";
      return entry;
    }
  }
  entry.script = std::move(script);
  return entry;
}

}  // namespace

std::vector<AnalysisBundle> analyze_pair(const PreferencePair& pair, const std::vector<EvalQuestion>& questions,
                                         const RunConfig& config, sandbox::Sandbox& sandbox, ScriptCache& cache) {
  if (questions.empty()) throw Error(ErrorKind::kInput, "analysis needs at least one question");
  std::vector<AnalysisBundle> out;
  for (const auto& q : questions) {
    if (q.kind == QuestionKind::kTextual) {
      out.push_back(text_bundle(pair, q, config, ""));
      continue;
    }
    auto entry = cache.get_or_create(q.text, sandbox.dialect(), [&] { return make_judge_script(q, config, sandbox); });
    if (!entry.script) {
      out.push_back(text_bundle(pair, q, config, "[verification unavailable: " + entry.failure + "]"));
      continue;
    }
    const auto& s = *entry.script;
    AnalysisBundle b;
    b.question = q;
    b.mode = AnalysisMode::kCode;
    b.exec_a = sandbox.execute({s.source, s.entry_name, pair.response_a, config.limits});
    b.exec_b = sandbox.execute({s.source, s.entry_name, pair.response_b, config.limits});
    b.body = scripts::render_fence(s.source, s.dialect) +
             "\nExecution feedback for Response 1: " + sandbox::render_feedback(*b.exec_a) +
             "\nExecution feedback for Response 2: " + sandbox::render_feedback(*b.exec_b);
    out.push_back(std::move(b));
  }
  return out;
}

std::optional<Label> parse_final_verdict(std::string_view reply) {
  static const std::regex re(R"(final\s+verdict\s*:\s*\**\s*response\s*([12]))", std::regex::icase);
  std::optional<Label> out;
  for (auto line : text::split_lines(reply)) {
    std::string l(line);
    std::smatch m;
    if (std::regex_search(l, m, re)) out = m[1] == "1" ? Label::kA : Label::kB;
  }
  return out;
}

JudgeVerdict vote(const std::vector<AnalysisBundle>& bundles, Order order) {
  int a = 0;
  int b = 0;
  for (const auto& bundle : bundles) {
    if (bundle.mode != AnalysisMode::kText) continue;
    if (auto l = corpus::parse_better_line(bundle.body)) (*l == Label::kA ? a : b)++;
  }
  std::optional<Label> winner;
  if (a > b) winner = Label::kA;
  if (b > a) winner = Label::kB;
  std::string raw = "votes: response 1=" + std::to_string(a) + ", response 2=" + std::to_string(b);
  return make_verdict(order, winner, raw, a == 0 && b == 0 ? "no analysis decision lines" : "analysis votes tied");
}

namespace {

JudgeVerdict ask_for_verdict(const gateway::ChatRequest& prompt, gateway::Gateway& backend, int retry_budget,
                             Order order) {
  std::string reply;
  for (int attempt = 0; attempt <= retry_budget; ++attempt) {
    reply = backend.complete(with_attempt_seed(prompt, attempt));
    if (auto w = parse_final_verdict(reply)) return make_verdict(order, w, reply, "");
  }
  return make_verdict(order, std::nullopt, reply,
                      "unparseable final verdict after " + std::to_string(retry_budget + 1) + " attempts");
}

}  // namespace

JudgeVerdict refine(const PreferencePair& pair, const std::vector<AnalysisBundle>& bundles, const RunConfig& config,
                    Order order) {
  if (bundles.empty()) throw Error(ErrorKind::kInput, "refinement needs at least one analysis");
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    parts.push_back("Question " + std::to_string(i + 1) + ": " + bundles[i].question.text + "\n" + bundles[i].body);
  }
  auto prompt = gateway::render_prompt(gateway::TemplateId::kRefine, {{"instruction", pair.instruction.text},
                                                                      {"response_1", pair.response_a},
                                                                      {"response_2", pair.response_b},
                                                                      {"analyses", text::join(parts, "\n\n")}});
  return ask_for_verdict(prompt, config.refiner_backend(), config.retry_budget, order);
}

namespace {

JudgeVerdict direct_judge(const PreferencePair& pair, const RunConfig& config, Order order) {
  auto prompt = gateway::render_prompt(gateway::TemplateId::kDirectJudge, {{"instruction", pair.instruction.text},
                                                                           {"response_1", pair.response_a},
                                                                           {"response_2", pair.response_b}});
  return ask_for_verdict(prompt, config.refiner_backend(), config.retry_budget, order);
}

bool is_data_error(const Error& e) { return e.category() == ErrorCategory::kData; }

}  // namespace

JudgeRecord judge(const PreferencePair& pair, const RunConfig& config, sandbox::Sandbox& sandbox, ScriptCache& cache) {
  JudgeRecord rec;
  rec.pair_id = pair.id;
  rec.gold = pair.gold;
  rec.original.verdict.order = Order::kOriginal;
  rec.swapped.verdict.order = Order::kSwapped;

  if (config.mode != Mode::kNoFTNoMF) {
    try {
      rec.questions = propose_questions(pair.instruction, config);
    } catch (const Error& e) {
      if (!is_data_error(e)) throw;
      rec.original.verdict = error_verdict(Order::kOriginal, e.what());
      rec.swapped.verdict = error_verdict(Order::kSwapped, e.what());
      return rec;
    }
  }

  for (Order order : {Order::kOriginal, Order::kSwapped}) {
    const PreferencePair p = order == Order::kOriginal ? pair : swap_pair(pair);
    OrderRecord& o = order == Order::kOriginal ? rec.original : rec.swapped;
    if (config.mode == Mode::kNoFTNoMF) {
      o.verdict = direct_judge(p, config, order);
      continue;
    }
    try {
      o.bundles = analyze_pair(p, rec.questions, config, sandbox, cache);
    } catch (const Error& e) {
      if (!is_data_error(e)) throw;
      o.verdict = error_verdict(order, e.what());
      continue;
    }
    o.pre_refine = vote(o.bundles, order);
    o.verdict = config.mode == Mode::kNoRefine ? *o.pre_refine : refine(p, o.bundles, config, order);
  }
  return rec;
}

std::vector<JudgeRecord> judge_all(const std::vector<PreferencePair>& pairs, const RunConfig& config,
                                   sandbox::Sandbox& sandbox) {
  ScriptCache cache;
  std::vector<JudgeRecord> out(pairs.size());
  std::vector<std::exception_ptr> failures(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        out[i] = judge(pairs[i], config, sandbox, cache);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.workers, 1)), 1,
                                          std::max<std::size_t>(pairs.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

Json to_json(const AnalysisBundle& b) {
  Json j{{"question", to_json(b.question)}, {"mode", std::string(to_string(b.mode))}, {"body", b.body}};
  if (b.exec_a) j["exec_a"] = sandbox::to_json(*b.exec_a);
  if (b.exec_b) j["exec_b"] = sandbox::to_json(*b.exec_b);
  return j;
}

namespace {

Json label_or_null(const std::optional<Label>& l) {
  return l ? Json(std::string(pj::to_string(*l))) : Json(nullptr);
}

std::optional<Label> label_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  auto s = j.get<std::string>();
  if (s == "A") return Label::kA;
  if (s == "B") return Label::kB;
  throw Error(ErrorKind::kMalformedRecord, "bad label " + s);
}

Json to_json(const OrderRecord& o) {
  Json bundles = Json::array();
  for (const auto& b : o.bundles) bundles.push_back(to_json(b));
  return Json{{"bundles", bundles},
              {"verdict", to_json(o.verdict)},
              {"pre_refine", o.pre_refine ? to_json(*o.pre_refine) : Json(nullptr)}};
}

JudgeVerdict verdict_from_json(const Json& j) {
  JudgeVerdict v;
  v.order = j.at("order").get<std::string>() == "swapped" ? Order::kSwapped : Order::kOriginal;
  v.winner = label_from(j.at("winner"));
  v.choice = label_from(j.at("choice"));
  v.raw_refiner_text = j.at("raw").get<std::string>();
  v.error = j.at("error").get<std::string>();
  return v;
}

OrderRecord order_from_json(const Json& j) {
  OrderRecord o;
  for (const auto& b : j.at("bundles")) {
    AnalysisBundle bundle;
    bundle.question = eval_question_from_json(b.at("question"));
    bundle.mode = b.at("mode").get<std::string>() == "code" ? AnalysisMode::kCode : AnalysisMode::kText;
    bundle.body = b.at("body").get<std::string>();
    if (b.contains("exec_a")) bundle.exec_a = sandbox::decode_result(b["exec_a"].dump());
    if (b.contains("exec_b")) bundle.exec_b = sandbox::decode_result(b["exec_b"].dump());
    o.bundles.push_back(std::move(bundle));
  }
  o.verdict = verdict_from_json(j.at("verdict"));
  if (!j.at("pre_refine").is_null()) o.pre_refine = verdict_from_json(j["pre_refine"]);
  return o;
}

}  // namespace

Json to_json(const JudgeVerdict& v) {
  return Json{{"order", std::string(to_string(v.order))},
              {"winner", label_or_null(v.winner)},
              {"choice", label_or_null(v.choice)},
              {"raw", v.raw_refiner_text},
              {"error", v.error}};
}

Json to_json(const JudgeRecord& r) {
  Json qs = Json::array();
  for (const auto& q : r.questions) qs.push_back(to_json(q));
  return Json{{"pair_id", r.pair_id},
              {"gold", std::string(pj::to_string(r.gold))},
              {"questions", qs},
              {"original", to_json(r.original)},
              {"swapped", to_json(r.swapped)}};
}

JudgeRecord judge_record_from_json(const Json& j) {
  try {
    JudgeRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    auto gold = label_from(j.at("gold"));
    if (!gold) throw Error(ErrorKind::kMalformedRecord, "record without gold label");
    r.gold = *gold;
    for (const auto& q : j.at("questions")) r.questions.push_back(eval_question_from_json(q));
    r.original = order_from_json(j.at("original"));
    r.swapped = order_from_json(j.at("swapped"));
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kMalformedRecord, std::string("malformed judge record: ") + e.what());
  }
}

Json run_manifest(const RunConfig& config, const sandbox::Sandbox& sandbox) {
  Json j{{"mode", std::string(to_string(config.mode))},
         {"rounds_k", config.rounds_k},
         {"question_temperature", config.effective_question_temperature()},
         {"seed", config.seed},
         {"questions_per_round", config.questions_per_round},
         {"retry_budget", config.retry_budget},
         {"sandbox", sandbox.identity()},
         {"dialect", sandbox.dialect()},
         {"limits",
          {{"wall_ms", config.limits.wall_ms},
           {"memory_mb", config.limits.memory_mb},
           {"output_kb", config.limits.output_kb}}},
         {"templates_version", gateway::templates_version()}};
  j["analyzer"] = config.analyzer ? Json(config.analyzer->identity()) : Json(nullptr);
  j["refiner"] = config.refiner_backend().identity();
  return j;
}

}  // namespace pj::judge
