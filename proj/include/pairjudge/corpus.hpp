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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairjudge/constraints.hpp"
#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/ratio.hpp"
#include "pairjudge/sandbox.hpp"
#include "pairjudge/scripts.hpp"

namespace pj::corpus {

inline constexpr std::string_view kTextHint = "Let's evaluate whether responses meet the criteria";
inline constexpr std::string_view kCodeHint = "Let's write a Python function";

enum class Task { kQuestionGenText, kQuestionGenCode, kTextAnalysis, kCodeAnalysis };
inline constexpr std::array<Task, 4> kAllTasks = {Task::kQuestionGenText, Task::kQuestionGenCode,
                                                  Task::kTextAnalysis, Task::kCodeAnalysis};

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view name);

struct PromptPart {
  std::string role;
  std::string text;

  friend bool operator==(const PromptPart&, const PromptPart&) = default;
};

struct Provenance {
  std::string instruction_id;
  std::string question_id;
  std::uint64_t seed = 0;
  std::optional<Category> constraint_category;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TrainingSample {
  Task task = Task::kQuestionGenText;
  std::vector<PromptPart> prompt_parts;
  std::string target;
  std::string hint;  // empty for question-generation tasks
  Provenance provenance;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

Json to_json(const TrainingSample& sample);
TrainingSample training_sample_from_json(const Json& j);

/// "1. q\n2. q\n..." in the given order.
std::string enumerate_questions(const std::vector<std::string>& texts);

/// Exactly three textual questions from the corpus question prompt. A reply
/// with a different count is retried `retry_budget` times, then
/// Error(kQuestionGen).
std::vector<EvalQuestion> gen_type1_questions(const Instruction& x, const std::vector<std::string>& sample_responses,
                                              gateway::Gateway& backend, int retry_budget = 1);

/// Last "Better: Response N" line of an analysis, as the slot it names.
std::optional<Label> parse_better_line(std::string_view reply);

/// Prefixes `hint` (plus ".\n") unless the text already starts with it.
std::string with_hint(std::string_view hint, std::string_view text);

struct TextAnalysisResult {
  bool accepted = false;
  std::string target;  // set when accepted
  std::string reason;  // "label_mismatch" or "unparseable" when rejected
  std::optional<Label> decision;
  std::string raw;
};

TextAnalysisResult collect_text_analysis(const PreferencePair& pair, const std::vector<EvalQuestion>& questions,
                                         gateway::Gateway& backend);

struct CodeSampleOptions {
  constraints::CategoryWeights weights = constraints::default_weights();
  scripts::ScriptOptions script;
  scripts::ValidationOptions validation;
};

struct CodeTriple {
  Instruction x_prime;
  EvalQuestion question;
  scripts::VerificationScript script;
  scripts::ValidationOutcome outcome;
};

struct Rejection {
  std::string instruction_id;
  std::string question_id;
  std::string stage;   // question_gen, text_analysis, generation, check1, check2, reverse
  std::string reason;

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

Json to_json(const Rejection& r);

struct CodeBuildResult {
  Instruction x_prime;
  std::vector<CodeTriple> accepted;
  std::vector<Rejection> rejections;
  std::vector<Json> script_records;
  scripts::FilterStats filter;
  std::map<std::string, std::int64_t> stage_rejections;
};

/// Samples one to three constraints, injects them into x, and generates and
/// validates one script per derived question. Only fully accepted scripts are
/// returned; everything else becomes a rejection record.
CodeBuildResult build_code_samples(const Instruction& x, std::uint64_t rng_seed,
                                   const std::vector<std::string>& sample_responses, gateway::Gateway& backend,
                                   sandbox::Sandbox& sandbox, const CodeSampleOptions& options = {});

/// Three pool responses not among `exclude`, chosen by the seed.
std::vector<std::string> draw_extra_samples(const std::vector<std::string>& exclude, std::uint64_t rng_seed);

struct TaskStats {
  std::int64_t count = 0;
  std::int64_t target_tokens = 0;  // whitespace-separated tokens over all targets

  Ratio average_length() const { return {target_tokens, count}; }
  friend bool operator==(const TaskStats&, const TaskStats&) = default;
};

struct CorpusStats {
  std::map<Task, TaskStats> tasks;
  std::map<Category, std::int64_t> histogram;
  scripts::FilterStats filter;
  std::int64_t rejected_analyses = 0;

  CorpusStats();
  void add(const TrainingSample& sample);
  void merge(const CorpusStats& other);
  TaskStats total() const;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats compute_stats(const std::vector<TrainingSample>& samples);

/// Writes one JSON line per sample through a temporary file that is renamed
/// into place. On failure nothing is left at `path`. Throws Error(kIo).
CorpusStats emit_corpus(const std::vector<TrainingSample>& samples, const std::string& path);

std::string stats_report(const CorpusStats& stats);
Json to_json(const CorpusStats& stats);

/// Per-pair inputs: the preference pair plus the extra fields a corpus record
/// carries ("sample_responses", optional "code_sample_responses").
struct CorpusOptions {
  std::uint64_t seed = 0;
  int workers = 4;
  bool code_samples = true;
  bool shuffle = false;
  int question_retry_budget = 1;
  CodeSampleOptions code;
};

struct CorpusRun {
  std::vector<TrainingSample> samples;
  std::vector<Rejection> rejections;
  std::vector<Json> script_records;
  scripts::FilterStats filter;
  std::int64_t rejected_analyses = 0;
};

/// Runs question generation, text analysis and code samples for every pair
/// on a bounded worker pool. Output order follows input order.
CorpusRun run_corpus(const std::vector<PreferencePair>& pairs, gateway::Gateway& backend, sandbox::Sandbox& sandbox,
                     const CorpusOptions& options);

/// Three sample responses for the instruction, read from the pair's extra
/// fields. Throws Error(kInput) when absent or malformed.
std::vector<std::string> sample_responses_of(const PreferencePair& pair, const std::string& key = "sample_responses");

}  // namespace pj::corpus
