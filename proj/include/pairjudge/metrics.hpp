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
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/ratio.hpp"

namespace pj::metrics {

struct AccuracyResult {
  Ratio original;
  Ratio swapped;

  /// Mean of the two per-order accuracies.
  Ratio acc() const { return {original.num + swapped.num, original.den + swapped.den}; }
  friend bool operator==(const AccuracyResult&, const AccuracyResult&) = default;
};

/// Verdict errors count as incorrect. Throws Error(kUndefinedMetric) on empty
/// input.
AccuracyResult accuracy(const std::vector<judge::JudgeRecord>& records);

/// Fraction of records whose two orders choose the same underlying response.
/// Verdict errors count as disagreement.
Ratio agreement(const std::vector<judge::JudgeRecord>& records);

/// Fraction of positions where the two verdict vectors agree. Throws
/// Error(kInput) on length mismatch, Error(kUndefinedMetric) when empty.
Ratio consistency(const std::vector<bool>& model, const std::vector<bool>& oracle);

struct RefineChange {
  Ratio wc;  // wrong before refinement, correct after
  Ratio cw;  // correct before, wrong after

  friend bool operator==(const RefineChange&, const RefineChange&) = default;
};

/// Aligned verdict lists; a missing verdict counts as wrong.
RefineChange refine_change(const std::vector<std::optional<Label>>& pre,
                           const std::vector<std::optional<Label>>& post, const std::vector<Label>& gold);

/// Over every order of every record that carries a pre-refine verdict.
/// Nullopt when none does.
std::optional<RefineChange> refine_change(const std::vector<judge::JudgeRecord>& records);

/// Exact rational, kept reduced.
struct Rational {
  __int128 num = 0;
  __int128 den = 1;

  static Rational of(const Ratio& r);
  Rational operator+(const Rational& o) const;
  Rational divided_by(std::int64_t k) const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct SubsetMetrics {
  std::string name;
  std::int64_t n = 0;
  AccuracyResult acc;
  Ratio agr;
  std::optional<RefineChange> refine;
};

struct ConsistencyMetrics {
  Ratio loose;
  Ratio strict;
};

struct MetricsReport {
  std::vector<SubsetMetrics> subsets;
  std::optional<SubsetMetrics> overall;  // present when there is more than one subset
  std::optional<ConsistencyMetrics> consistency;

  /// Unweighted mean of per-subset Acc.
  Rational ave() const;
};

SubsetMetrics subset_metrics(const std::string& name, const std::vector<judge::JudgeRecord>& records);

/// Subsets in the given order; the overall row pools every record.
MetricsReport build_report(const std::vector<std::pair<std::string, std::vector<judge::JudgeRecord>>>& subsets);

std::string render_report(const MetricsReport& report);
Json to_json(const MetricsReport& report);

/// Percentage with one decimal, rounded half away from zero.
std::string percent(const Ratio& r);
std::string percent(const Rational& r);

}  // namespace pj::metrics
