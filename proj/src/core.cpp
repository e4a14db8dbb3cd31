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

#include "pairjudge/core.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "pairjudge/error.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pj {

std::string_view to_string(Label l) { return l == Label::kA ? "A" : "B"; }

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kKeywords: return "Keywords";
    case Category::kLanguage: return "Language";
    case Category::kLengthConstraints: return "LengthConstraints";
    case Category::kDetectableContent: return "DetectableContent";
    case Category::kDetectableFormat: return "DetectableFormat";
    case Category::kChangeCases: return "ChangeCases";
    case Category::kStartEndWith: return "StartEndWith";
    case Category::kPunctuation: return "Punctuation";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(QuestionKind k) {
  return k == QuestionKind::kTextual ? "Textual" : "Verifiable";
}

Json to_json(const ConstraintSpec& spec) {
  Json params = Json::object();
  for (const auto& entry : spec.params) {
    std::visit([&](const auto& v) { params[entry.first] = v; }, entry.second);
  }
  return Json{{"category", std::string(to_string(spec.category))}, {"params", params}};
}

ConstraintSpec constraint_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("category") || !j["category"].is_string()) {
    throw Error(ErrorKind::kSpec, "constraint spec needs a string 'category'");
  }
  auto category = parse_category(j["category"].get<std::string>());
  if (!category) {
    throw Error(ErrorKind::kSpec, "unknown constraint category '" +
                                      j["category"].get<std::string>() + "'");
  }
  ConstraintSpec spec;
  spec.category = *category;
  if (j.contains("params")) {
    const Json& params = j["params"];
    if (!params.is_object()) throw Error(ErrorKind::kSpec, "'params' must be an object");
    for (const auto& [name, value] : params.items()) {
      if (value.is_boolean()) {
        spec.params[name] = value.get<bool>();
      } else if (value.is_number_integer()) {
        spec.params[name] = value.get<std::int64_t>();
      } else if (value.is_string()) {
        spec.params[name] = value.get<std::string>();
      } else {
        throw Error(ErrorKind::kSpec, "param '" + name + "' must be a scalar integer, boolean or string");
      }
    }
  }
  return spec;
}

std::string question_id_for(std::string_view normalized_text) {
  return "q-" + hex64(fnv1a64(normalized_text)).substr(0, 12);
}

EvalQuestion make_textual_question(std::string_view text) {
  EvalQuestion q;
  q.text = normalize_question(text);
  q.id = question_id_for(q.text);
  q.kind = QuestionKind::kTextual;
  return q;
}

Json to_json(const EvalQuestion& q) {
  Json j{{"id", q.id}, {"kind", std::string(to_string(q.kind))}, {"text", q.text}};
  if (q.constraint) j["constraint"] = to_json(*q.constraint);
  return j;
}

EvalQuestion eval_question_from_json(const Json& j) {
  EvalQuestion q;
  q.id = j.at("id").get<std::string>();
  q.text = j.at("text").get<std::string>();
  q.kind = j.at("kind").get<std::string>() == "Verifiable" ? QuestionKind::kVerifiable
                                                          : QuestionKind::kTextual;
  if (j.contains("constraint")) q.constraint = constraint_spec_from_json(j["constraint"]);
  return q;
}

namespace {

const char* const kKnownKeys[] = {"id", "instruction", "response_a", "response_b",
                                  "gold", "turns", "lang", "constraints"};

bool is_known_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorKind::kMalformedRecord,
              "malformed record at line " + std::to_string(line) + ": " + why);
}

std::string required_string(const Json& rec, const char* key, std::size_t line) {
  if (!rec.contains(key)) malformed(line, std::string("missing key '") + key + "'");
  if (!rec[key].is_string()) malformed(line, std::string("key '") + key + "' must be a string");
  return rec[key].get<std::string>();
}

enum class GoldParse { kA, kB, kTie };

GoldParse parse_gold(const Json& value, const LoadOptions& options, std::size_t line) {
  std::string raw;
  if (value.is_string()) {
    raw = value.get<std::string>();
  } else if (value.is_number_integer()) {
    raw = std::to_string(value.get<std::int64_t>());
  } else {
    throw Error(ErrorKind::kUnknownLabel, "unknown label at line " + std::to_string(line));
  }
  std::string_view t = text::trim(raw);
  if (t == "A" || t == "a" || t == "1") return GoldParse::kA;
  if (t == "B" || t == "b" || t == "2") return GoldParse::kB;
  for (const auto& sentinel : options.tie_sentinels) {
    if (text::iequals(t, sentinel)) return GoldParse::kTie;
  }
  throw Error(ErrorKind::kUnknownLabel, "unknown label at line " + std::to_string(line));
}

}  // namespace

LoadedDataset parse_pairwise_dataset(std::istream& in, const LoadOptions& options) {
  LoadedDataset out;
  const auto& is_english = options.is_english ? options.is_english
                                              : std::function<bool(std::string_view)>(text::looks_english);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::parse_error& e) {
      malformed(lineno, "invalid JSON");
    }
    if (!rec.is_object()) malformed(lineno, "expected a JSON object");

    PreferencePair pair;
    pair.id = required_string(rec, "id", lineno);
    pair.instruction.id = pair.id;
    pair.instruction.text = required_string(rec, "instruction", lineno);
    pair.response_a = required_string(rec, "response_a", lineno);
    pair.response_b = required_string(rec, "response_b", lineno);
    if (text::trim(pair.instruction.text).empty()) malformed(lineno, "empty instruction");
    if (pair.response_a.empty() || pair.response_b.empty()) malformed(lineno, "empty response");
    if (!rec.contains("gold")) malformed(lineno, "missing key 'gold'");
    GoldParse gold = parse_gold(rec["gold"], options, lineno);

    if (rec.contains("turns")) {
      if (!rec["turns"].is_number_integer()) malformed(lineno, "'turns' must be an integer");
      pair.turns = rec["turns"].get<std::int64_t>();
    }
    if (rec.contains("lang")) {
      if (!rec["lang"].is_string()) malformed(lineno, "'lang' must be a string");
      pair.lang = rec["lang"].get<std::string>();
    }
    if (rec.contains("constraints")) {
      if (!rec["constraints"].is_array()) malformed(lineno, "'constraints' must be an array");
      try {
        for (const auto& c : rec["constraints"]) {
          pair.instruction.constraints.push_back(constraint_spec_from_json(c));
        }
      } catch (const Error& e) {
        malformed(lineno, e.what());
      }
      if (pair.instruction.constraints.size() > 3) malformed(lineno, "more than 3 constraints");
    }
    for (const auto& [key, value] : rec.items()) {
      if (!is_known_key(key)) pair.extra[key] = value;
    }

    if (gold == GoldParse::kTie) {
      if (!options.drop_ties) {
        throw Error(ErrorKind::kUnknownLabel,
                    "tie label at line " + std::to_string(lineno) + " with tie dropping disabled");
      }
      ++out.report.ties_dropped;
      continue;
    }
    pair.gold = gold == GoldParse::kA ? Label::kA : Label::kB;

    if (options.drop_multi_turn && pair.turns && *pair.turns > 1) {
      ++out.report.multi_turn_dropped;
      continue;
    }
    if (options.drop_non_english) {
      bool english = pair.lang ? text::istarts_with(*pair.lang, "en")
                               : is_english(pair.instruction.text);
      if (!english) {
        ++out.report.non_english_dropped;
        continue;
      }
    }
    out.pairs.push_back(std::move(pair));
  }
  out.report.lines = lineno;
  return out;
}

LoadedDataset load_pairwise_dataset(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open dataset '" + path + "'");
  return parse_pairwise_dataset(in, options);
}

Json to_json(const PreferencePair& pair) {
  Json j = pair.extra.is_object() ? pair.extra : Json::object();
  j["id"] = pair.id;
  j["instruction"] = pair.instruction.text;
  j["response_a"] = pair.response_a;
  j["response_b"] = pair.response_b;
  j["gold"] = std::string(to_string(pair.gold));
  if (pair.turns) j["turns"] = *pair.turns;
  if (pair.lang) j["lang"] = *pair.lang;
  if (!pair.instruction.constraints.empty()) {
    Json cs = Json::array();
    for (const auto& c : pair.instruction.constraints) cs.push_back(to_json(c));
    j["constraints"] = cs;
  }
  return j;
}

void save_pairwise_dataset(const std::string& path, const std::vector<PreferencePair>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write dataset '" + path + "'");
  for (const auto& p : pairs) out << to_json(p).dump() << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path + "'");
}

PreferencePair swap_pair(const PreferencePair& pair) {
  PreferencePair out = pair;
  std::swap(out.response_a, out.response_b);
  out.gold = flip(pair.gold);
  return out;
}

namespace {

// Length of a leading "<digits>." or "<digits>)" token followed by whitespace
// or end of text; 0 when there is none.
std::size_t enumeration_prefix(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i == 0 || i >= s.size() || (s[i] != '.' && s[i] != ')')) return 0;
  ++i;
  if (i < s.size() && !text::is_space(s[i])) return 0;
  return i;
}

}  // namespace

std::string normalize_question(std::string_view text) {
  std::string_view s = text::trim(text);
  for (std::size_t n = enumeration_prefix(s); n > 0; n = enumeration_prefix(s)) {
    s = text::trim(s.substr(n));
  }
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (text::is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> parse_question_list(std::string_view reply) {
  std::vector<std::string> out;
  for (auto line : text::split_lines(reply)) {
    std::string_view l = text::trim(line);
    if (l.size() >= 2 && (l[0] == '-' || l[0] == '*') && text::is_space(l[1])) l = text::trim(l.substr(2));
    std::string q = normalize_question(l);
    if (q.size() < 2 || q.back() != '?') continue;
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(std::move(q));
  }
  return out;
}

}  // namespace pj
