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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairjudge/core.hpp"

namespace pj::constraints {

enum class CheckMode { kLoose, kStrict };

std::string_view to_string(CheckMode mode);

struct CheckResult {
  bool pass = false;
  /// Measured quantities the verdict depends on. Loose results also carry
  /// "loose_variant": the first relaxation that passed, or "none".
  std::map<std::string, ParamValue> detail;

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

Json to_json(const CheckResult& result);

/// Throws Error(kSpec) unless the spec matches exactly one variant of its
/// category schema with well-typed params.
void validate(const ConstraintSpec& spec);

/// Name of the schema variant the spec instantiates, e.g. "frequency".
std::string variant_of(const ConstraintSpec& spec);

/// Pure check of one response against one spec.
CheckResult check(std::string_view response, const ConstraintSpec& spec, CheckMode mode);

/// Names of the relaxations tried in Loose mode, in order. "original" is the
/// verbatim text, which keeps Loose at least as permissive as Strict.
const std::vector<std::string>& loose_variant_names();
/// The text a given Loose variant checks.
std::string relax(std::string_view response, std::string_view variant_name);

// Individual relaxation transforms.
std::string strip_emphasis(std::string_view s);
std::string drop_preamble(std::string_view s);
std::string drop_signoff(std::string_view s);

/// Throws Error(kCompatibility) on the first incompatible pair.
void check_compatible(const std::vector<ConstraintSpec>& specs);

/// Appends one requirement sentence per spec to the instruction. The seed
/// fixes the order of the sentences.
Instruction inject_constraints(const Instruction& instruction,
                               const std::vector<ConstraintSpec>& specs,
                               std::uint64_t rng_seed);

std::string injection_sentence(const ConstraintSpec& spec);
EvalQuestion question_for(const ConstraintSpec& spec);

/// Inverse of question_for: recognizes a templated question text.
std::optional<ConstraintSpec> parse_verifiable_question(std::string_view text);

using CategoryWeights = std::map<Category, double>;

/// Category weights shipped with the schema (counts per category).
const CategoryWeights& default_weights();

/// Weighted draw of `count` distinct categories, each instantiated with
/// params from the schema's sample pools.
std::vector<ConstraintSpec> sample_constraints(int count, const CategoryWeights& weights,
                                               std::uint64_t rng_seed);

}  // namespace pj::constraints
