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

#include "pairjudge/scripts.hpp"

#include <regex>
#include <set>

#include "pairjudge/error.hpp"
#include "pairjudge/resources.hpp"
#include "pairjudge/text.hpp"

namespace pj::scripts {

namespace {

struct Fence {
  std::string info;
  std::string body;
};

// Opening or closing fence: up to 3 spaces, then a run of 3+ backticks.
bool fence_line(std::string_view line, std::size_t& ticks, std::string_view& rest) {
  std::size_t i = 0;
  while (i < line.size() && i < 4 && line[i] == ' ') ++i;
  if (i > 3) return false;
  std::size_t start = i;
  while (i < line.size() && line[i] == '`') ++i;
  ticks = i - start;
  if (ticks < 3) return false;
  rest = line.substr(i);
  return true;
}

std::vector<Fence> scan_fences(std::string_view markdown) {
  std::vector<Fence> fences;
  auto lines = text::split_lines(markdown);
  std::size_t i = 0;
  while (i < lines.size()) {
    std::size_t ticks = 0;
    std::string_view rest;
    if (!fence_line(lines[i], ticks, rest) || rest.find('`') != std::string_view::npos) {
      ++i;
      continue;
    }
    Fence f;
    auto info = text::words(rest);
    if (!info.empty()) f.info = std::string(info.front());
    std::vector<std::string> body;
    ++i;
    for (; i < lines.size(); ++i) {
      std::size_t close_ticks = 0;
      std::string_view tail;
      if (fence_line(lines[i], close_ticks, tail) && close_ticks >= ticks && text::trim(tail).empty()) {
        ++i;
        break;
      }
      body.emplace_back(lines[i]);
    }
    f.body = text::join(body, "\n");
    fences.push_back(std::move(f));
  }
  return fences;
}

gateway::ChatRequest with_attempt_seed(gateway::ChatRequest req, int attempt) {
  if (attempt > 0) req.params.seed = attempt;
  return req;
}

}  // namespace

std::string extract_fenced_code(std::string_view markdown, std::string_view expected_tag) {
  auto fences = scan_fences(markdown);
  for (const auto& f : fences) {
    if (!expected_tag.empty() && text::iequals(f.info, expected_tag)) return f.body;
  }
  for (const auto& f : fences) {
    if (f.info.empty()) return f.body;
  }
  throw Error(ErrorKind::kExtraction, fences.empty() ? "no fenced code block found"
                                                     : "no code block tagged '" + std::string(expected_tag) + "'");
}

std::string render_fence(std::string_view body, std::string_view tag) {
  return "```" + std::string(tag) + "\n" + std::string(body) + "\n```";
}

std::string find_entry_name(std::string_view source) {
  static const std::regex def_re(R"(^(?:async[ \t]+)?def[ \t]+([A-Za-z_][A-Za-z0-9_]*)[ \t]*\()");
  std::string last;
  for (auto line : text::split_lines(source)) {
    std::string l(line);
    std::smatch m;
    if (std::regex_search(l, m, def_re)) {
      if (m[1] == "evaluate") return "evaluate";
      last = m[1];
    }
  }
  if (last.empty()) throw Error(ErrorKind::kExtraction, "script defines no top-level function");
  return last;
}

VerificationScript make_script(std::string source, std::string dialect, const EvalQuestion& question) {
  if (text::trim(source).empty()) throw Error(ErrorKind::kExtraction, "script source is empty");
  if (question.kind != QuestionKind::kVerifiable) {
    throw Error(ErrorKind::kInput, "scripts bind only to verifiable questions");
  }
  VerificationScript s;
  s.entry_name = find_entry_name(source);
  s.source = std::move(source);
  s.dialect = std::move(dialect);
  s.question = question;
  return s;
}

VerificationScript generate_script_from(const gateway::ChatRequest& prompt, const EvalQuestion& question,
                                        gateway::Gateway& backend, const ScriptOptions& options) {
  std::string last_error;
  for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
    std::string reply = backend.complete(with_attempt_seed(prompt, attempt));
    try {
      return make_script(extract_fenced_code(reply, options.dialect), options.dialect, question);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kExtraction) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorKind::kGeneration, "no extractable code after " + std::to_string(options.retry_budget + 1) +
                                          " attempts: " + last_error);
}

VerificationScript generate_script(const EvalQuestion& question, const std::vector<std::string>& sample_responses,
                                   gateway::Gateway& backend, const ScriptOptions& options) {
  if (question.kind != QuestionKind::kVerifiable) {
    throw Error(ErrorKind::kInput, "script generation needs a verifiable question");
  }
  if (sample_responses.size() != 3) throw Error(ErrorKind::kInput, "script generation needs 3 sample responses");
  auto prompt = gateway::render_prompt(gateway::TemplateId::kCodeGen, {{"question", question.text},
                                                                        {"sample_1", sample_responses[0]},
                                                                        {"sample_2", sample_responses[1]},
                                                                        {"sample_3", sample_responses[2]}});
  return generate_script_from(prompt, question, backend, options);
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kCheck1: return "check1";
    case Stage::kCheck2: return "check2";
    case Stage::kReverse: return "reverse";
  }
  return "?";
}

Json to_json(const ValidationOutcome& outcome) {
  Json failures = Json::array();
  for (const auto& f : outcome.failures) {
    failures.push_back({{"stage", std::string(to_string(f.stage))}, {"sample_index", f.sample_index},
                        {"detail", f.detail}});
  }
  return Json{{"check1", outcome.check1_pass},
              {"check2", outcome.check2_pass},
              {"reverse", outcome.reverse_pass},
              {"explanation", outcome.explanation},
              {"failures", failures}};
}

std::optional<bool> parse_consistency_verdict(std::string_view reply) {
  auto lines = text::split_lines(reply);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::string line = text::trim_copy(*it);
    if (line.empty()) continue;
    std::string cleaned;
    for (char c : line) {
      if (c != '*') cleaned += c;
    }
    cleaned = text::trim_copy(cleaned);
    if (text::istarts_with(cleaned, "verdict:")) cleaned = text::trim_copy(std::string_view(cleaned).substr(8));
    if (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
    if (text::iequals(cleaned, "CONSISTENT")) return true;
    if (text::iequals(cleaned, "INCONSISTENT")) return false;
    return std::nullopt;
  }
  return std::nullopt;
}

namespace {

struct ReverseAttempt {
  std::string explanation;
  std::optional<bool> verdict;
};

ReverseAttempt run_reverse(const VerificationScript& script, gateway::Gateway& backend, int retry_budget) {
  ReverseAttempt out;
  out.explanation =
      text::trim_copy(backend.complete(gateway::render_prompt(gateway::TemplateId::kExplain, {{"source", script.source}})));
  auto check = gateway::render_prompt(gateway::TemplateId::kConsistencyCheck,
                                      {{"explanation", out.explanation}, {"question", script.question.text}});
  for (int attempt = 0; attempt <= retry_budget && !out.verdict; ++attempt) {
    out.verdict = parse_consistency_verdict(backend.complete(with_attempt_seed(check, attempt)));
  }
  return out;
}

}  // namespace

ReverseResult reverse_validate(const VerificationScript& script, gateway::Gateway& backend, int retry_budget) {
  auto r = run_reverse(script, backend, retry_budget);
  if (!r.verdict) {
    throw Error(ErrorKind::kValidation, "unparseable consistency verdict after " +
                                            std::to_string(retry_budget + 1) + " attempts");
  }
  return ReverseResult{r.explanation, *r.verdict};
}

ValidationOutcome validate_script(const VerificationScript& script, const std::vector<std::string>& prompt_samples,
                                  const std::vector<std::string>& extra_samples, sandbox::Sandbox& sandbox,
                                  gateway::Gateway& backend, const ValidationOptions& options) {
  if (prompt_samples.empty() || extra_samples.empty()) throw Error(ErrorKind::kInput, "sample lists must be non-empty");
  std::set<std::string> seen(prompt_samples.begin(), prompt_samples.end());
  for (const auto& s : extra_samples) {
    if (seen.count(s)) throw Error(ErrorKind::kInput, "prompt and extra sample lists overlap");
  }
  if (script.dialect != sandbox.dialect()) {
    throw Error(ErrorKind::kConfig, "script dialect '" + script.dialect + "' does not match sandbox dialect '" +
                                        sandbox.dialect() + "'");
  }

  ValidationOutcome out;
  auto run_stage = [&](Stage stage, const std::vector<std::string>& samples) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      sandbox::ExecRequest req{script.source, script.entry_name, samples[i], options.limits};
      auto result = sandbox.execute(req);
      if (!result.ok()) {
        out.failures.push_back({stage, static_cast<int>(i), sandbox::render_feedback(result)});
        return false;
      }
      ++out.sandbox_successes;
    }
    return true;
  };

  out.check1_pass = run_stage(Stage::kCheck1, prompt_samples);
  if (!out.check1_pass) return out;
  out.check2_pass = run_stage(Stage::kCheck2, extra_samples);
  if (!out.check2_pass) return out;

  auto r = run_reverse(script, backend, options.retry_budget);
  out.explanation = r.explanation;
  if (!r.verdict) {
    out.failures.push_back({Stage::kReverse, -1, "unparseable consistency verdict"});
  } else if (!*r.verdict) {
    out.failures.push_back({Stage::kReverse, -1, "explanation inconsistent with question"});
  } else {
    out.reverse_pass = true;
  }
  return out;
}

void FilterStats::add(const ValidationOutcome& o) {
  ++total;
  if (o.check1_pass) ++passed_check1;
  if (o.check1_pass && o.check2_pass) ++passed_check2;
  if (o.accepted()) ++passed_reverse;
}

void FilterStats::merge(const FilterStats& other) {
  total += other.total;
  passed_check1 += other.passed_check1;
  passed_check2 += other.passed_check2;
  passed_reverse += other.passed_reverse;
}

Ratio FilterStats::remaining(Stage stage) const {
  switch (stage) {
    case Stage::kCheck1: return {passed_check1, total};
    case Stage::kCheck2: return {passed_check2, passed_check1};
    case Stage::kReverse: return {passed_reverse, passed_check2};
  }
  return {};
}

std::int64_t FilterStats::rejected(Stage stage) const {
  Ratio r = remaining(stage);
  return r.den - r.num;
}

Json to_json(const FilterStats& s) {
  return Json{{"total", s.total},
              {"passed_check1", s.passed_check1},
              {"passed_check2", s.passed_check2},
              {"passed_reverse", s.passed_reverse}};
}

Json script_record(const VerificationScript& script, const ValidationOutcome& outcome) {
  Json o = to_json(outcome);
  return Json{{"question_id", script.question.id},
              {"dialect", script.dialect},
              {"entry_name", script.entry_name},
              {"source", script.source},
              {"outcome",
               {{"check1", o["check1"]},
                {"check2", o["check2"]},
                {"reverse", o["reverse"]},
                {"explanation", o["explanation"]},
                {"failures", o["failures"]}}}};
}

const std::vector<std::string>& sample_pool() {
  static const std::vector<std::string> pool = [] {
    Json j = Json::parse(resources::sample_pool_json());
    return j.at("responses").get<std::vector<std::string>>();
  }();
  return pool;
}

}  // namespace pj::scripts
