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


#include <gtest/gtest.h>

#include <random>

#include "pairjudge/error.hpp"
#include "pairjudge/metrics.hpp"

namespace pj::metrics {
namespace {

using judge::JudgeRecord;
using judge::JudgeVerdict;

JudgeVerdict verdict(std::optional<Label> choice, judge::Order order = judge::Order::kOriginal) {
  JudgeVerdict v;
  v.order = order;
  v.choice = choice;
  if (choice) v.winner = order == judge::Order::kOriginal ? *choice : flip(*choice);
  return v;
}

JudgeRecord record(Label gold, std::optional<Label> original, std::optional<Label> swapped) {
  JudgeRecord r;
  r.gold = gold;
  r.original.verdict = verdict(original);
  r.swapped.verdict = verdict(swapped, judge::Order::kSwapped);
  return r;
}

TEST(AccuracyTest, HandEnumeratedFixture) {
  // Gold is A throughout; correct means the choice is A.
  std::vector<JudgeRecord> recs = {record(Label::kA, Label::kA, Label::kA), record(Label::kA, Label::kA, Label::kB),
                                   record(Label::kA, Label::kB, Label::kB), record(Label::kA, Label::kA, Label::kA)};
  auto acc = accuracy(recs);
  EXPECT_EQ(acc.original, (Ratio{3, 4}));
  EXPECT_EQ(acc.swapped, (Ratio{2, 4}));
  EXPECT_DOUBLE_EQ(acc.original.value(), 0.75);
  EXPECT_DOUBLE_EQ(acc.swapped.value(), 0.5);
  EXPECT_DOUBLE_EQ(acc.acc().value(), 0.625);
  EXPECT_EQ(agreement(recs), (Ratio{3, 4}));
}

TEST(AccuracyTest, ErrorsAreWrongAndDisagree) {
  std::vector<JudgeRecord> recs = {record(Label::kB, std::nullopt, Label::kB), record(Label::kB, std::nullopt, std::nullopt)};
  EXPECT_EQ(accuracy(recs).original, (Ratio{0, 2}));
  EXPECT_EQ(accuracy(recs).swapped, (Ratio{1, 2}));
  EXPECT_EQ(agreement(recs), (Ratio{0, 2}));
  try {
    accuracy({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefinedMetric);
  }
  EXPECT_THROW(agreement({}), Error);
}

TEST(ConsistencyTest, CountsMatches) {
  EXPECT_EQ(consistency({true, false, true}, {true, true, true}), (Ratio{2, 3}));
  EXPECT_THROW(consistency({true}, {}), Error);
  EXPECT_THROW(consistency({}, {}), Error);
}

TEST(AveTest, RendersTableRow) {
  // Subset accuracies 81.0, 82.4, 78.5, 78.3 and 68.2 percent.
  MetricsReport report;
  for (std::int64_t permille : {810, 824, 785, 783, 682}) {
    SubsetMetrics s;
    s.n = 1000;
    s.acc.original = {permille, 1000};
    s.acc.swapped = {permille, 1000};
    report.subsets.push_back(s);
  }
  EXPECT_EQ(report.ave(), (Rational{971, 1250}));
  EXPECT_EQ(percent(report.ave()), "77.7");
  EXPECT_THROW(MetricsReport{}.ave(), Error);
}

TEST(RationalTest, ExactArithmetic) {
  auto third = Rational::of({1, 3});
  auto sixth = Rational::of({2, 12});
  EXPECT_EQ(sixth, (Rational{1, 6}));
  EXPECT_EQ(third + sixth, (Rational{1, 2}));
  EXPECT_EQ((third + third + third).divided_by(3), (Rational{1, 3}));
  EXPECT_THROW(Rational::of({1, 0}), Error);
  EXPECT_THROW(third.divided_by(0), Error);
  EXPECT_EQ(percent(Rational{1, 8}), "12.5");
  EXPECT_EQ(percent(Ratio{1, 8}), "12.5");
  EXPECT_EQ(percent(Ratio{2, 3}), "66.7");
}

TEST(RefineChangeTest, DefinitionOnSmallLists) {
  auto rc = refine_change({Label::kA, Label::kB, std::nullopt, Label::kA}, {Label::kB, Label::kA, Label::kA, Label::kA},
                          {Label::kA, Label::kA, Label::kA, Label::kA});
  EXPECT_EQ(rc.wc, (Ratio{2, 4}));
  EXPECT_EQ(rc.cw, (Ratio{1, 4}));
  EXPECT_THROW(refine_change({Label::kA}, {}, {Label::kA}), Error);
  EXPECT_THROW(refine_change(std::vector<std::optional<Label>>{}, {}, {}), Error);
}

TEST(RefineChangeTest, IdentityWithAccuracyDelta) {
  std::mt19937_64 gen(2024);
  auto pick = [&]() -> std::optional<Label> {
    switch (gen() % 3) {
      case 0: return Label::kA;
      case 1: return Label::kB;
      default: return std::nullopt;
    }
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 1 + gen() % 40;
    std::vector<JudgeRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
      Label gold = gen() % 2 ? Label::kA : Label::kB;
      auto first = pick();
      auto second = pick();
      auto r = record(gold, first, second);
      r.original.pre_refine = verdict(pick());
      r.swapped.pre_refine = verdict(pick(), judge::Order::kSwapped);
      recs.push_back(r);
    }
    auto rc = refine_change(recs);
    ASSERT_TRUE(rc);
    std::int64_t pre_correct = 0;
    for (const auto& r : recs) {
      pre_correct += r.original.pre_refine->choice == r.gold;
      pre_correct += r.swapped.pre_refine->choice == r.gold;
    }
    auto post = accuracy(recs).acc();
    ASSERT_EQ(rc->wc.den, post.den);
    ASSERT_EQ(rc->wc.num - rc->cw.num, post.num - pre_correct) << "trial " << trial;
  }
}

TEST(RefineChangeTest, AbsentWithoutPreRefineVerdicts) {
  EXPECT_FALSE(refine_change(std::vector<JudgeRecord>{record(Label::kA, Label::kA, Label::kA)}));
}

TEST(ReportTest, BuildsSubsetsOverallAndFooter) {
  std::vector<JudgeRecord> first = {record(Label::kA, Label::kA, Label::kA), record(Label::kA, Label::kA, Label::kB),
                                    record(Label::kA, Label::kB, Label::kB), record(Label::kA, Label::kA, Label::kA)};
  std::vector<JudgeRecord> second = {record(Label::kB, Label::kB, Label::kB)};
  auto report = build_report({{"first", first}, {"second", second}});
  ASSERT_EQ(report.subsets.size(), 2u);
  ASSERT_TRUE(report.overall);
  EXPECT_EQ(report.overall->n, 5);
  EXPECT_EQ(report.overall->acc.acc(), (Ratio{7, 10}));
  // (5/8 + 1) / 2
  EXPECT_EQ(report.ave(), (Rational{13, 16}));
  report.consistency = ConsistencyMetrics{{9, 10}, {4, 5}};
  auto text = render_report(report);
  EXPECT_NE(text.find("first"), std::string::npos);
  EXPECT_NE(text.find("62.5"), std::string::npos);
  EXPECT_NE(text.find("81.3"), std::string::npos);
  EXPECT_NE(text.find("Loose 90.0 (9/10), Strict 80.0 (4/5)"), std::string::npos) << text;
  EXPECT_NE(text.find("Verdict errors count as incorrect"), std::string::npos);
  auto j = to_json(report);
  EXPECT_EQ(j["ave"]["percent"], "81.3");
  EXPECT_EQ(j["subsets"][0]["acc"]["percent"], "62.5");
  EXPECT_FALSE(j["subsets"][0].contains("refine_wc"));
  EXPECT_FALSE(build_report({{"only", second}}).overall);
  EXPECT_THROW(build_report({{"empty", {}}}), Error);
}

}  // namespace
}  // namespace pj::metrics
