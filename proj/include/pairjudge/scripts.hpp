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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/ratio.hpp"
#include "pairjudge/sandbox.hpp"

namespace pj::scripts {

struct VerificationScript {
  std::string source;
  std::string dialect = "python";
  std::string entry_name;
  EvalQuestion question;
};

/// Body of the first fence tagged `expected_tag` (case-insensitive), else of
/// the first untagged fence. Throws Error(kExtraction) if neither exists.
std::string extract_fenced_code(std::string_view markdown, std::string_view expected_tag);

/// Wraps body in a fence that extract_fenced_code reads back verbatim.
std::string render_fence(std::string_view body, std::string_view tag);

/// The last top-level `def name(` in the source, or `evaluate` when defined.
/// Throws Error(kExtraction) when the source defines no function.
std::string find_entry_name(std::string_view source);

/// Checks the script invariants and fills entry_name.
VerificationScript make_script(std::string source, std::string dialect, const EvalQuestion& question);

struct ScriptOptions {
  int retry_budget = 2;
  std::string dialect = "python";
};

/// Renders the code-generation prompt with the question and three sample
/// responses and extracts the script from the reply. Throws Error(kGeneration)
/// when no attempt yields an extractable function.
VerificationScript generate_script(const EvalQuestion& question, const std::vector<std::string>& sample_responses,
                                   gateway::Gateway& backend, const ScriptOptions& options = {});

/// Same, for an already rendered prompt. Attempt n > 0 carries seed n so that
/// retries are distinct requests.
VerificationScript generate_script_from(const gateway::ChatRequest& prompt, const EvalQuestion& question,
                                        gateway::Gateway& backend, const ScriptOptions& options = {});

enum class Stage { kCheck1, kCheck2, kReverse };
std::string_view to_string(Stage s);

struct StageFailure {
  Stage stage = Stage::kCheck1;
  int sample_index = -1;  // -1 for the reverse stage
  std::string detail;

  friend bool operator==(const StageFailure&, const StageFailure&) = default;
};

struct ValidationOutcome {
  bool check1_pass = false;
  bool check2_pass = false;
  bool reverse_pass = false;
  std::string explanation;
  std::vector<StageFailure> failures;
  int sandbox_successes = 0;

  bool accepted() const { return check1_pass && check2_pass && reverse_pass; }
};

Json to_json(const ValidationOutcome& outcome);

struct ValidationOptions {
  int retry_budget = 2;
  sandbox::Limits limits;
};

struct ReverseResult {
  std::string explanation;
  bool consistent = false;
};

/// Parses CONSISTENT / INCONSISTENT from the last non-empty line.
std::optional<bool> parse_consistency_verdict(std::string_view reply);

/// Explain the source, then ask whether the explanation serves the question.
/// Throws Error(kValidation) when no verdict parses within the budget.
ReverseResult reverse_validate(const VerificationScript& script, gateway::Gateway& backend, int retry_budget = 2);

/// Check-1 on the prompt samples, Check-2 on the extra samples, then reverse
/// validation. Stages short-circuit. Sandbox infrastructure errors propagate.
ValidationOutcome validate_script(const VerificationScript& script, const std::vector<std::string>& prompt_samples,
                                  const std::vector<std::string>& extra_samples, sandbox::Sandbox& sandbox,
                                  gateway::Gateway& backend, const ValidationOptions& options = {});

/// Entrants and survivors per filtering stage.
struct FilterStats {
  std::int64_t total = 0;
  std::int64_t passed_check1 = 0;
  std::int64_t passed_check2 = 0;
  std::int64_t passed_reverse = 0;

  void add(const ValidationOutcome& outcome);
  void merge(const FilterStats& other);
  Ratio remaining(Stage stage) const;
  std::int64_t rejected(Stage stage) const;

  friend bool operator==(const FilterStats&, const FilterStats&) = default;
};

Json to_json(const FilterStats& stats);

/// One JSON line of the script artifact file.
Json script_record(const VerificationScript& script, const ValidationOutcome& outcome);

/// Held-out responses used for Check-2, shipped as a resource.
const std::vector<std::string>& sample_pool();

}  // namespace pj::scripts
