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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/sandbox.hpp"
#include "pairjudge/scripts.hpp"

namespace pj::judge {

enum class Mode { kFull, kNoRefine, kNoFT, kNoFTNoMF };
std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

enum class Order { kOriginal, kSwapped };
std::string_view to_string(Order o);

enum class AnalysisMode { kText, kCode };
std::string_view to_string(AnalysisMode m);

struct AnalysisBundle {
  EvalQuestion question;
  AnalysisMode mode = AnalysisMode::kText;
  std::string body;
  std::optional<sandbox::ExecResult> exec_a;
  std::optional<sandbox::ExecResult> exec_b;
};

/// Verdict of one order. `winner` names the slot ("Response 1" = A) in that
/// order; `choice` maps it back to the pair's own labels.
struct JudgeVerdict {
  Order order = Order::kOriginal;
  std::optional<Label> winner;
  std::optional<Label> choice;
  std::string raw_refiner_text;
  std::string error;  // set when no winner could be parsed
};

struct RunConfig {
  int rounds_k = 1;
  std::optional<double> question_temperature;  // default: 0.2 when k > 1, else 0
  Mode mode = Mode::kFull;
  std::shared_ptr<gateway::Gateway> analyzer;
  std::shared_ptr<gateway::Gateway> refiner;  // null means the analyzer backend
  std::uint64_t seed = 0;
  int questions_per_round = 3;
  int retry_budget = 2;
  sandbox::Limits limits;
  int workers = 4;

  double effective_question_temperature() const;
  gateway::Gateway& analysis_backend() const;
  gateway::Gateway& refiner_backend() const;
};

/// Validated scripts keyed by (question text, dialect). Failures are cached
/// too, so a question is attempted once per run.
class ScriptCache {
 public:
  struct Entry {
    std::optional<scripts::VerificationScript> script;
    std::string failure;
  };

  template <typename Make>
  Entry get_or_create(const std::string& question_text, const std::string& dialect, Make&& make) {
    std::shared_ptr<Slot> slot;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto& s = slots_[{question_text, dialect}];
      if (!s) s = std::make_shared<Slot>();
      slot = s;
    }
    std::lock_guard<std::mutex> lock(slot->mu);
    if (!slot->ready) {
      slot->entry = make();
      slot->ready = true;
    }
    return slot->entry;
  }

  std::size_t size() const;

 private:
  struct Slot {
    std::mutex mu;
    bool ready = false;
    Entry entry;
  };
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<Slot>> slots_;
};

/// Constraint questions first, then k rounds of backend questions, deduped by
/// normalized text in order of first appearance. Throws Error(kQuestionGen)
/// when nothing usable comes back.
std::vector<EvalQuestion> propose_questions(const Instruction& x, const RunConfig& config);

/// One bundle per question, in question order. Verifiable questions take the
/// script path and fall back to text analysis with a note when no working
/// script is available. Sandbox infrastructure errors propagate.
std::vector<AnalysisBundle> analyze_pair(const PreferencePair& pair, const std::vector<EvalQuestion>& questions,
                                         const RunConfig& config, sandbox::Sandbox& sandbox, ScriptCache& cache);

/// Last line matching "Final verdict: Response N", case-insensitive.
std::optional<Label> parse_final_verdict(std::string_view reply);

/// Majority of the "Better: Response N" lines over the bundles. A tie or no
/// votes yields an error verdict.
JudgeVerdict vote(const std::vector<AnalysisBundle>& bundles, Order order);

/// Refiner call over all bundles. Unparseable replies are retried, then an
/// error verdict is returned.
JudgeVerdict refine(const PreferencePair& pair, const std::vector<AnalysisBundle>& bundles, const RunConfig& config,
                    Order order);

struct OrderRecord {
  std::vector<AnalysisBundle> bundles;
  JudgeVerdict verdict;
  std::optional<JudgeVerdict> pre_refine;
};

struct JudgeRecord {
  std::string pair_id;
  Label gold = Label::kA;
  std::vector<EvalQuestion> questions;
  OrderRecord original;
  OrderRecord swapped;
};

/// Runs the configured pipeline on the pair and on its swap.
JudgeRecord judge(const PreferencePair& pair, const RunConfig& config, sandbox::Sandbox& sandbox, ScriptCache& cache);

/// Judges every pair on a bounded worker pool; output follows input order.
std::vector<JudgeRecord> judge_all(const std::vector<PreferencePair>& pairs, const RunConfig& config,
                                   sandbox::Sandbox& sandbox);

Json to_json(const AnalysisBundle& b);
Json to_json(const JudgeVerdict& v);
Json to_json(const JudgeRecord& r);
JudgeRecord judge_record_from_json(const Json& j);

/// Reproducibility manifest for a run.
Json run_manifest(const RunConfig& config, const sandbox::Sandbox& sandbox);

}  // namespace pj::judge
