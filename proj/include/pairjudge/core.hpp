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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace pj {

using Json = nlohmann::json;

enum class Label { kA, kB };

inline Label flip(Label l) { return l == Label::kA ? Label::kB : Label::kA; }
std::string_view to_string(Label l);

/// The eight verifiable-constraint families.
enum class Category {
  kKeywords,
  kLanguage,
  kLengthConstraints,
  kDetectableContent,
  kDetectableFormat,
  kChangeCases,
  kStartEndWith,
  kPunctuation,
};

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::kKeywords,          Category::kLanguage,        Category::kLengthConstraints,
    Category::kDetectableContent, Category::kDetectableFormat, Category::kChangeCases,
    Category::kStartEndWith,      Category::kPunctuation,
};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

using ParamValue = std::variant<std::int64_t, bool, std::string>;

struct ConstraintSpec {
  Category category = Category::kKeywords;
  std::map<std::string, ParamValue> params;

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

Json to_json(const ConstraintSpec& spec);
/// Structural parse only; schema validation lives in the constraint kit.
ConstraintSpec constraint_spec_from_json(const Json& j);

struct Instruction {
  std::string id;
  std::string text;
  std::vector<ConstraintSpec> constraints;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct PreferencePair {
  std::string id;
  Instruction instruction;
  std::string response_a;
  std::string response_b;
  Label gold = Label::kA;
  std::optional<std::int64_t> turns;
  std::optional<std::string> lang;
  /// Keys not understood by the loader, written back verbatim.
  Json extra = Json::object();

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

enum class QuestionKind { kTextual, kVerifiable };
std::string_view to_string(QuestionKind k);

struct EvalQuestion {
  std::string id;
  QuestionKind kind = QuestionKind::kTextual;
  std::string text;
  std::optional<ConstraintSpec> constraint;

  friend bool operator==(const EvalQuestion&, const EvalQuestion&) = default;
};

/// Builds a Textual question; id derived from the normalized text.
EvalQuestion make_textual_question(std::string_view text);
std::string question_id_for(std::string_view normalized_text);
Json to_json(const EvalQuestion& q);
EvalQuestion eval_question_from_json(const Json& j);

struct LoadOptions {
  bool drop_ties = true;
  bool drop_non_english = true;
  bool drop_multi_turn = true;
  std::vector<std::string> tie_sentinels = {"tie"};
  std::function<bool(std::string_view)> is_english;  // defaults to text::looks_english
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t ties_dropped = 0;
  std::size_t non_english_dropped = 0;
  std::size_t multi_turn_dropped = 0;
};

struct LoadedDataset {
  std::vector<PreferencePair> pairs;
  LoadReport report;
};

LoadedDataset load_pairwise_dataset(const std::string& path, const LoadOptions& options = {});
LoadedDataset parse_pairwise_dataset(std::istream& in, const LoadOptions& options = {});

Json to_json(const PreferencePair& pair);
void save_pairwise_dataset(const std::string& path, const std::vector<PreferencePair>& pairs);

PreferencePair swap_pair(const PreferencePair& pair);

/// Strips leading "<digits>." / "<digits>)" enumeration, collapses whitespace
/// runs, trims. Casing is kept.
std::string normalize_question(std::string_view text);

/// Question lines from a model reply: every line that ends with "?" after
/// dropping a bullet marker and normalizing. Duplicates are kept once.
std::vector<std::string> parse_question_list(std::string_view reply);

}  // namespace pj
