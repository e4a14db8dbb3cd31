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

#include "pairjudge/metrics.hpp"

#include <sstream>

#include "pairjudge/error.hpp"

namespace pj::metrics {

namespace {

bool correct(const judge::JudgeVerdict& v, Label gold) { return v.choice && *v.choice == gold; }

void require_non_empty(const std::vector<judge::JudgeRecord>& records, const char* metric) {
  if (records.empty()) throw Error(ErrorKind::kUndefinedMetric, std::string(metric) + " of zero records is undefined");
}

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational reduced(__int128 num, __int128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

}  // namespace

AccuracyResult accuracy(const std::vector<judge::JudgeRecord>& records) {
  require_non_empty(records, "accuracy");
  AccuracyResult r;
  const auto n = static_cast<std::int64_t>(records.size());
  r.original.den = n;
  r.swapped.den = n;
  for (const auto& rec : records) {
    if (correct(rec.original.verdict, rec.gold)) ++r.original.num;
    if (correct(rec.swapped.verdict, rec.gold)) ++r.swapped.num;
  }
  return r;
}

Ratio agreement(const std::vector<judge::JudgeRecord>& records) {
  require_non_empty(records, "agreement");
  Ratio r{0, static_cast<std::int64_t>(records.size())};
  for (const auto& rec : records) {
    const auto& a = rec.original.verdict.choice;
    const auto& b = rec.swapped.verdict.choice;
    if (a && b && *a == *b) ++r.num;
  }
  return r;
}

Ratio consistency(const std::vector<bool>& model, const std::vector<bool>& oracle) {
  if (model.size() != oracle.size()) throw Error(ErrorKind::kInput, "consistency needs equal-length verdict lists");
  if (model.empty()) throw Error(ErrorKind::kUndefinedMetric, "consistency of zero verdicts is undefined");
  Ratio r{0, static_cast<std::int64_t>(model.size())};
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (model[i] == oracle[i]) ++r.num;
  }
  return r;
}

RefineChange refine_change(const std::vector<std::optional<Label>>& pre, const std::vector<std::optional<Label>>& post,
                           const std::vector<Label>& gold) {
  if (pre.size() != post.size() || pre.size() != gold.size()) {
    throw Error(ErrorKind::kInput, "refine change needs aligned verdict lists");
  }
  if (pre.empty()) throw Error(ErrorKind::kUndefinedMetric, "refine change of zero verdicts is undefined");
  const auto n = static_cast<std::int64_t>(pre.size());
  RefineChange rc{{0, n}, {0, n}};
  for (std::size_t i = 0; i < pre.size(); ++i) {
    bool before = pre[i] && *pre[i] == gold[i];
    bool after = post[i] && *post[i] == gold[i];
    if (!before && after) ++rc.wc.num;
    if (before && !after) ++rc.cw.num;
  }
  return rc;
}

std::optional<RefineChange> refine_change(const std::vector<judge::JudgeRecord>& records) {
  std::vector<std::optional<Label>> pre;
  std::vector<std::optional<Label>> post;
  std::vector<Label> gold;
  for (const auto& rec : records) {
    for (const auto* o : {&rec.original, &rec.swapped}) {
      if (!o->pre_refine) continue;
      pre.push_back(o->pre_refine->choice);
      post.push_back(o->verdict.choice);
      gold.push_back(rec.gold);
    }
  }
  if (pre.empty()) return std::nullopt;
  return refine_change(pre, post, gold);
}

Rational Rational::of(const Ratio& r) {
  if (r.den == 0) throw Error(ErrorKind::kUndefinedMetric, "ratio with zero denominator");
  return reduced(r.num, r.den);
}

Rational Rational::operator+(const Rational& o) const {
  __int128 g = gcd128(den, o.den);
  __int128 l = den / g * o.den;
  return reduced(num * (l / den) + o.num * (l / o.den), l);
}

Rational Rational::divided_by(std::int64_t k) const {
  if (k == 0) throw Error(ErrorKind::kUndefinedMetric, "mean of zero values is undefined");
  return reduced(num, den * k);
}

Rational MetricsReport::ave() const {
  if (subsets.empty()) throw Error(ErrorKind::kUndefinedMetric, "average over zero subsets is undefined");
  Rational sum;
  for (const auto& s : subsets) sum = sum + Rational::of(s.acc.acc());
  return sum.divided_by(static_cast<std::int64_t>(subsets.size()));
}

std::string percent(const Ratio& r) { return format_percent(r, 1); }

std::string percent(const Rational& r) { return format_fixed(r.num * 100, r.den, 1); }

SubsetMetrics subset_metrics(const std::string& name, const std::vector<judge::JudgeRecord>& records) {
  if (records.empty()) throw Error(ErrorKind::kUndefinedMetric, "subset '" + name + "' has no records");
  SubsetMetrics m;
  m.name = name;
  m.n = static_cast<std::int64_t>(records.size());
  m.acc = accuracy(records);
  m.agr = agreement(records);
  m.refine = refine_change(records);
  return m;
}

MetricsReport build_report(const std::vector<std::pair<std::string, std::vector<judge::JudgeRecord>>>& subsets) {
  MetricsReport report;
  std::vector<judge::JudgeRecord> all;
  for (const auto& [name, records] : subsets) {
    report.subsets.push_back(subset_metrics(name, records));
    all.insert(all.end(), records.begin(), records.end());
  }
  if (subsets.size() > 1) report.overall = subset_metrics("overall", all);
  return report;
}

namespace {

std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

std::string refine_cell(const std::optional<RefineChange>& rc, bool wc) {
  if (!rc) return "-";
  return percent(wc ? rc->wc : rc->cw);
}

Json ratio_json(const Ratio& r) { return Json{{"num", r.num}, {"den", r.den}, {"percent", percent(r)}}; }

Json subset_json(const SubsetMetrics& s) {
  Json j{{"name", s.name},
         {"n", s.n},
         {"acc_original", ratio_json(s.acc.original)},
         {"acc_swapped", ratio_json(s.acc.swapped)},
         {"acc", ratio_json(s.acc.acc())},
         {"agr", ratio_json(s.agr)}};
  if (s.refine) {
    j["refine_wc"] = ratio_json(s.refine->wc);
    j["refine_cw"] = ratio_json(s.refine->cw);
  }
  return j;
}

}  // namespace

std::string render_report(const MetricsReport& report) {
  std::ostringstream o;
  auto row = [&](const std::string& name, const std::string& n, const std::string& a1, const std::string& a2,
                 const std::string& acc, const std::string& agr, const std::string& wc, const std::string& cw) {
    o << pad_right(name, 20) << pad_left(n, 7) << pad_left(a1, 9) << pad_left(a2, 9) << pad_left(acc, 8)
      << pad_left(agr, 8) << pad_left(wc, 8) << pad_left(cw, 8) << '\n';
  };
  auto subset_row = [&](const SubsetMetrics& s) {
    row(s.name, std::to_string(s.n), percent(s.acc.original), percent(s.acc.swapped), percent(s.acc.acc()),
        percent(s.agr), refine_cell(s.refine, true), refine_cell(s.refine, false));
  };
  row("Subset", "N", "Acc-orig", "Acc-swap", "Acc", "Agr", "W->C", "C->W");
  for (const auto& s : report.subsets) subset_row(s);
  if (report.overall) subset_row(*report.overall);
  if (!report.subsets.empty()) row("Ave", "", "", "", percent(report.ave()), "", "", "");
  if (report.consistency) {
    o << "\nConsistency with constraint checks: Loose " << percent(report.consistency->loose) << " ("
      << report.consistency->loose.num << "/" << report.consistency->loose.den << "), Strict "
      << percent(report.consistency->strict) << " (" << report.consistency->strict.num << "/"
      << report.consistency->strict.den << ")\n";
  }
  o << "\nPercentages rounded half away from zero. Acc is the mean of the two order accuracies; Ave is the unweighted"
       " mean of subset Acc.\nVerdict errors count as incorrect for Acc and as disagreement for Agr.\n";
  return o.str();
}

Json to_json(const MetricsReport& report) {
  Json subsets = Json::array();
  for (const auto& s : report.subsets) subsets.push_back(subset_json(s));
  Json j{{"subsets", subsets}};
  j["overall"] = report.overall ? subset_json(*report.overall) : Json(nullptr);
  if (!report.subsets.empty()) {
    Rational ave = report.ave();
    j["ave"] = {{"num", std::to_string(static_cast<long long>(ave.num))},
                {"den", std::to_string(static_cast<long long>(ave.den))},
                {"percent", percent(ave)}};
  }
  if (report.consistency) {
    j["consistency"] = {{"loose", ratio_json(report.consistency->loose)},
                        {"strict", ratio_json(report.consistency->strict)}};
  }
  return j;
}

}  // namespace pj::metrics
