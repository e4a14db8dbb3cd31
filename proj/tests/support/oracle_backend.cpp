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


#include "oracle_backend.hpp"

#include <array>

#include "pairjudge/error.hpp"
#include "pairjudge/scripts.hpp"

namespace pj::testing {

namespace {

constexpr std::array<const char*, 11> kHeaders = {
    "[Instruction]",        "[Response 1]",        "[Response 2]",        "[Evaluation Question]",
    "[Evaluation Questions]", "[Sample Response 1]", "[Sample Response 2]", "[Sample Response 3]",
    "[Explanation]",        "[Preliminary Analyses]", "Begin your answer with:"};

std::string winner_line(const char* prefix, int slot) { return std::string(prefix) + "Response " + std::to_string(slot); }

}  // namespace

std::string prompt_section(const std::string& prompt, const std::string& header) {
  const std::string open = header + "\n";
  std::size_t at = prompt.rfind("\n" + open);
  std::size_t start;
  if (at != std::string::npos) {
    start = at + 1 + open.size();
  } else if (prompt.compare(0, open.size(), open) == 0) {
    start = open.size();
  } else {
    return "";
  }
  std::size_t end = prompt.size();
  for (const char* h : kHeaders) {
    std::size_t next = prompt.find(std::string("\n\n") + h, start);
    if (next != std::string::npos && next < end) end = next;
  }
  return prompt.substr(start, end - start);
}

const std::string& user_text(const gateway::ChatRequest& request) {
  for (const auto& m : request.messages) {
    if (m.role == gateway::Role::kUser) return m.text;
  }
  throw Error(ErrorKind::kInput, "request without user message");
}

int oracle_choice(const OracleRules& rules, const std::string& instruction, const std::string& r1,
                  const std::string& r2) {
  double s1 = rules.score(instruction, r1);
  double s2 = rules.score(instruction, r2);
  if (s1 != s2) return s1 > s2 ? 1 : 2;
  return r1 >= r2 ? 1 : 2;
}

std::string oracle_reply(const OracleRules& rules, const gateway::ChatRequest& request) {
  const std::string& u = user_text(request);
  auto choice = [&] {
    return oracle_choice(rules, prompt_section(u, "[Instruction]"), prompt_section(u, "[Response 1]"),
                         prompt_section(u, "[Response 2]"));
  };
  switch (request.purpose) {
    case gateway::Purpose::kQuestionGen:
      return u.find("[Sample Response 1]") != std::string::npos ? rules.corpus_questions(request)
                                                                 : rules.questions(request);
    case gateway::Purpose::kTextAnalysis:
      return "Let's evaluate whether responses meet the criteria.\nBoth responses were compared.\n" +
             winner_line("Better: ", choice());
    case gateway::Purpose::kCodeGen:
      return "Let's write a Python function.\n" +
             scripts::render_fence("# behavior: " + rules.script_behavior +
                                       "\ndef evaluate(response):\n    return {\"words\": len(response.split())}",
                                   "python");
    case gateway::Purpose::kExplain:
      return "The function takes the response text and returns the number of words it contains.";
    case gateway::Purpose::kConsistencyCheck:
      return rules.consistency;
    case gateway::Purpose::kRefine:
    case gateway::Purpose::kDirectJudge:
      return "After review the analyses hold.\n" + winner_line("Final verdict: ", choice());
  }
  return "";
}

std::shared_ptr<gateway::Backend> make_oracle_backend(OracleRules rules, std::string name) {
  return std::make_shared<gateway::CallbackBackend>(
      [rules = std::move(rules)](const gateway::ChatRequest& r) { return oracle_reply(rules, r); }, std::move(name));
}

std::shared_ptr<gateway::Gateway> make_test_gateway(std::shared_ptr<gateway::Backend> backend) {
  gateway::GatewayOptions opts;
  opts.retry.budget = 0;
  opts.sleeper = [](std::chrono::milliseconds) {};
  return std::make_shared<gateway::Gateway>(std::move(backend), opts);
}

}  // namespace pj::testing
