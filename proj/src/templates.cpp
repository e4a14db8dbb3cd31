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

#include <algorithm>

#include "pairjudge/gateway.hpp"
#include "pairjudge/resources.hpp"

namespace pj::gateway {

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kCorpusQuestionGen: return "corpus_question_gen";
    case TemplateId::kAnalyzerQuestionGen: return "analyzer_question_gen";
    case TemplateId::kCorpusTextAnalysis: return "corpus_text_analysis";
    case TemplateId::kAnalyzerAnalysis: return "analyzer_analysis";
    case TemplateId::kCodeGen: return "codegen";
    case TemplateId::kAnalyzerCodeGen: return "analyzer_codegen";
    case TemplateId::kExplain: return "explain";
    case TemplateId::kConsistencyCheck: return "consistency_check";
    case TemplateId::kRefine: return "refine";
    case TemplateId::kDirectJudge: return "direct_judge";
  }
  return "?";
}

namespace {

struct Template {
  Purpose purpose = Purpose::kQuestionGen;
  int max_tokens = 2048;
  std::string system;
  std::string user;
};

const Json& templates_root() {
  static const Json root = Json::parse(resources::templates_json());
  return root;
}

Template load(TemplateId id) {
  const Json& t = templates_root().at("templates").at(std::string(to_string(id)));
  Template out;
  out.purpose = *parse_purpose(t.at("purpose").get<std::string>());
  out.max_tokens = t.at("max_tokens").get<int>();
  out.system = t.at("system").get<std::string>();
  out.user = t.at("user").get<std::string>();
  return out;
}

void collect_slots(const std::string& body, std::vector<std::string>& out) {
  std::size_t i = 0;
  while ((i = body.find("{{", i)) != std::string::npos) {
    std::size_t close = body.find("}}", i + 2);
    if (close == std::string::npos) break;
    std::string name = body.substr(i + 2, close - i - 2);
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    i = close + 2;
  }
}

std::string substitute(const std::string& body, const Slots& slots) {
  std::string out;
  std::size_t i = 0;
  for (;;) {
    std::size_t open = body.find("{{", i);
    if (open == std::string::npos) break;
    std::size_t close = body.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(body, i, open - i);
    out += slots.at(body.substr(open + 2, close - open - 2));
    i = close + 2;
  }
  out.append(body, i, std::string::npos);
  return out;
}

}  // namespace

std::vector<std::string> required_slots(TemplateId id) {
  Template t = load(id);
  std::vector<std::string> out;
  collect_slots(t.system, out);
  collect_slots(t.user, out);
  return out;
}

ChatRequest render_prompt(TemplateId id, const Slots& slots) {
  Template t = load(id);
  std::string missing;
  for (const auto& name : required_slots(id)) {
    if (!slots.count(name)) {
      if (!missing.empty()) missing += "; ";
      missing += "missing slot " + name;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kTemplate, std::string(to_string(id)) + ": " + missing);
  }
  ChatRequest r;
  r.purpose = t.purpose;
  r.params.max_tokens = t.max_tokens;
  r.params.temperature = 0.0;
  if (!t.system.empty()) r.messages.push_back({Role::kSystem, substitute(t.system, slots)});
  r.messages.push_back({Role::kUser, substitute(t.user, slots)});
  return r;
}

std::string templates_version() { return templates_root().at("version").get<std::string>(); }

}  // namespace pj::gateway
