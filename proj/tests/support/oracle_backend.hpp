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


#pragma once

// Programmable backend for tests. It reads the rendered prompt sections back
// out of a request and answers each purpose with a configurable rule, so the
// replies depend on content only and never on request fingerprints.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pairjudge/gateway.hpp"

namespace pj::testing {

/// Text of a "[Header]" section of a rendered prompt, up to the next known
/// section header. Empty when the header is absent.
std::string prompt_section(const std::string& prompt, const std::string& header);

/// The user message of a request.
const std::string& user_text(const gateway::ChatRequest& request);

struct OracleRules {
  /// Score of a response; the higher one wins. Ties go to the text that sorts
  /// last, so the choice never depends on the slot.
  std::function<double(const std::string& instruction, const std::string& response)> score =
      [](const std::string&, const std::string& r) { return static_cast<double>(r.size()); };
  /// Analyzer question-generation reply, given the request.
  std::function<std::string(const gateway::ChatRequest&)> questions = [](const gateway::ChatRequest&) {
    return std::string("1. Is the response accurate?\n2. Is the response complete?\n3. Is the response clear?");
  };
  /// Corpus question-generation reply.
  std::function<std::string(const gateway::ChatRequest&)> corpus_questions = [](const gateway::ChatRequest&) {
    return std::string("1. Does the response answer the request?\n2. Is the response well organized?\n"
                       "3. Is the response factually sound?");
  };
  /// Behavior marker used for generated scripts.
  std::string script_behavior = "word_count";
  /// Reply to the consistency check.
  std::string consistency = "The values answer the question.\nCONSISTENT";
};

/// Decision the rules make for a pair of slots: 1 or 2.
int oracle_choice(const OracleRules& rules, const std::string& instruction, const std::string& r1,
                  const std::string& r2);

/// Reply the rules produce for a request.
std::string oracle_reply(const OracleRules& rules, const gateway::ChatRequest& request);

std::shared_ptr<gateway::Backend> make_oracle_backend(OracleRules rules = {}, std::string name = "oracle");

/// Gateway with retries disabled and no sleeping.
std::shared_ptr<gateway::Gateway> make_test_gateway(std::shared_ptr<gateway::Backend> backend);

}  // namespace pj::testing
