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

#include "pairjudge/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "pairjudge/error.hpp"
#include "pairjudge/resources.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pj::constraints {

std::string_view to_string(CheckMode mode) {
  return mode == CheckMode::kLoose ? "loose" : "strict";
}

Json to_json(const CheckResult& result) {
  Json detail = Json::object();
  for (const auto& entry : result.detail) {
    std::visit([&](const auto& x) { detail[entry.first] = x; }, entry.second);
  }
  return Json{{"pass", result.pass}, {"detail", detail}};
}

namespace {

// ---------------------------------------------------------------------------
// Schema

enum class ParamType { kInt, kString, kFlag, kEnum };

struct ParamSchema {
  std::string name;
  ParamType type = ParamType::kString;
  std::vector<std::string> values;  // enum keys
};

struct VariantSchema {
  std::string name;
  std::vector<ParamSchema> params;  // sorted by name
  std::string question;
  std::string injection;
  Json sample;
};

struct CategorySchema {
  double weight = 0;
  std::vector<VariantSchema> variants;
};

struct Schema {
  std::map<std::string, std::map<std::string, std::string>> maps;
  std::map<std::string, std::map<std::string, std::pair<std::string, std::string>>> nouns;
  std::map<Category, CategorySchema> categories;
};

Schema load_schema() {
  Json root = Json::parse(resources::constraint_schema_json());
  Schema schema;
  for (const auto& [name, entries] : root.at("maps").items()) {
    for (const auto& [k, v] : entries.items()) schema.maps[name][k] = v.get<std::string>();
  }
  for (const auto& [name, entries] : root.at("nouns").items()) {
    for (const auto& [k, v] : entries.items()) {
      schema.nouns[name][k] = {v.at(0).get<std::string>(), v.at(1).get<std::string>()};
    }
  }
  for (const auto& [cat_name, cat] : root.at("categories").items()) {
    auto category = parse_category(cat_name);
    if (!category) throw Error(ErrorKind::kSpec, "schema names unknown category " + cat_name);
    CategorySchema cs;
    cs.weight = cat.at("weight").get<double>();
    for (const auto& v : cat.at("variants")) {
      VariantSchema vs;
      vs.name = v.at("name").get<std::string>();
      vs.question = v.at("question").get<std::string>();
      vs.injection = v.at("injection").get<std::string>();
      vs.sample = v.at("sample");
      for (const auto& [pname, p] : v.at("params").items()) {
        ParamSchema ps;
        ps.name = pname;
        std::string type = p.at("type").get<std::string>();
        if (type == "int") {
          ps.type = ParamType::kInt;
        } else if (type == "string") {
          ps.type = ParamType::kString;
        } else if (type == "flag") {
          ps.type = ParamType::kFlag;
        } else {
          ps.type = ParamType::kEnum;
          if (p.contains("map")) {
            for (const auto& [k, _] : schema.maps.at(p["map"].get<std::string>())) ps.values.push_back(k);
          } else {
            ps.values = p.at("values").get<std::vector<std::string>>();
          }
        }
        vs.params.push_back(std::move(ps));
      }
      cs.variants.push_back(std::move(vs));
    }
    schema.categories[*category] = std::move(cs);
  }
  return schema;
}

const Schema& schema() {
  static const Schema s = load_schema();
  return s;
}

const VariantSchema* find_variant(const ConstraintSpec& spec) {
  auto it = schema().categories.find(spec.category);
  if (it == schema().categories.end()) return nullptr;
  for (const auto& v : it->second.variants) {
    if (v.params.size() != spec.params.size()) continue;
    bool same = true;
    for (const auto& p : v.params) {
      if (!spec.params.count(p.name)) {
        same = false;
        break;
      }
    }
    if (same) return &v;
  }
  return nullptr;
}

std::string describe_keys(const ConstraintSpec& spec) {
  std::string keys;
  for (const auto& [k, _] : spec.params) {
    if (!keys.empty()) keys += ", ";
    keys += k;
  }
  return "{" + keys + "}";
}

const VariantSchema& validated_variant(const ConstraintSpec& spec) {
  const VariantSchema* v = find_variant(spec);
  if (!v) {
    throw Error(ErrorKind::kSpec, "unsupported params " + describe_keys(spec) + " for category " +
                                      std::string(to_string(spec.category)));
  }
  for (const auto& p : v->params) {
    const ParamValue& value = spec.params.at(p.name);
    const std::string where = std::string(to_string(spec.category)) + "." + p.name;
    switch (p.type) {
      case ParamType::kInt: {
        const auto* n = std::get_if<std::int64_t>(&value);
        if (!n || *n <= 0) throw Error(ErrorKind::kSpec, where + " must be a positive integer");
        break;
      }
      case ParamType::kFlag: {
        const auto* b = std::get_if<bool>(&value);
        if (!b || !*b) throw Error(ErrorKind::kSpec, where + " must be true");
        break;
      }
      case ParamType::kString: {
        const auto* s = std::get_if<std::string>(&value);
        if (!s || text::trim(*s).empty() || s->find('"') != std::string::npos ||
            s->find('\n') != std::string::npos) {
          throw Error(ErrorKind::kSpec, where + " must be a non-empty single-line string without quotes");
        }
        break;
      }
      case ParamType::kEnum: {
        const auto* s = std::get_if<std::string>(&value);
        if (!s || std::find(p.values.begin(), p.values.end(), *s) == p.values.end()) {
          throw Error(ErrorKind::kSpec, where + " has an unsupported value");
        }
        break;
      }
    }
  }
  return *v;
}

std::int64_t int_param(const ConstraintSpec& spec, const std::string& name) {
  return std::get<std::int64_t>(spec.params.at(name));
}

const std::string& str_param(const ConstraintSpec& spec, const std::string& name) {
  return std::get<std::string>(spec.params.at(name));
}

// ---------------------------------------------------------------------------
// Templates: {param}, {map:M:param}, {noun:N:param:count_param},
// {plural:count_param:singular:plural}

std::vector<std::string> split_colon(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t c = s.find(':', start);
    if (c == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, c - start));
    start = c + 1;
  }
}

std::string scalar_text(const ParamValue& v) {
  if (const auto* n = std::get_if<std::int64_t>(&v)) return std::to_string(*n);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return std::get<bool>(v) ? "true" : "false";
}

std::string render_template(std::string_view tpl, const ConstraintSpec& spec) {
  std::string out;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '{') {
      out.push_back(tpl[i++]);
      continue;
    }
    std::size_t close = tpl.find('}', i);
    auto parts = split_colon(tpl.substr(i + 1, close - i - 1));
    if (parts.size() == 1) {
      out += scalar_text(spec.params.at(parts[0]));
    } else if (parts[0] == "map") {
      out += schema().maps.at(parts[1]).at(str_param(spec, parts[2]));
    } else if (parts[0] == "noun") {
      const auto& forms = schema().nouns.at(parts[1]).at(str_param(spec, parts[2]));
      out += int_param(spec, parts[3]) == 1 ? forms.first : forms.second;
    } else if (parts[0] == "plural") {
      out += int_param(spec, parts[1]) == 1 ? parts[2] : parts[3];
    }
    i = close + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Measurements

bool is_word_byte(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::int64_t count_keyword(std::string_view s, std::string_view keyword) {
  std::int64_t count = 0;
  const std::size_t k = keyword.size();
  std::size_t i = 0;
  while (k > 0 && i + k <= s.size()) {
    bool match = text::istarts_with(s.substr(i), keyword) && (i == 0 || !is_word_byte(s[i - 1])) &&
                 (i + k == s.size() || !is_word_byte(s[i + k]));
    if (match) {
      ++count;
      i += k;
    } else {
      ++i;
    }
  }
  return count;
}

std::int64_t count_sentences(std::string_view s) {
  std::int64_t count = 0;
  bool text_since_boundary = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool terminator = c == '.' || c == '!' || c == '?';
    if (terminator && (i + 1 == s.size() || text::is_space(s[i + 1]))) {
      ++count;
      text_since_boundary = false;
    } else if (!text::is_space(c)) {
      text_since_boundary = true;
    }
  }
  return count + (text_since_boundary ? 1 : 0);
}

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

std::int64_t count_paragraphs(std::string_view s) {
  std::int64_t count = 0;
  bool in_paragraph = false;
  for (auto line : text::split_lines(s)) {
    if (is_blank(line)) {
      in_paragraph = false;
    } else if (!in_paragraph) {
      in_paragraph = true;
      ++count;
    }
  }
  return count;
}

std::int64_t count_placeholders(std::string_view s) {
  std::int64_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '[') {
      std::size_t j = s.find_first_of("[]\n", i + 1);
      if (j != std::string_view::npos && s[j] == ']' && j > i + 1) {
        ++count;
        i = j + 1;
        continue;
      }
    }
    ++i;
  }
  return count;
}

std::int64_t count_highlights(std::string_view s) {
  std::int64_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '*') {
      std::size_t j = s.find_first_of("*\n", i + 1);
      if (j != std::string_view::npos && s[j] == '*' && j > i + 1) {
        ++count;
        i = j + 1;
        continue;
      }
    }
    ++i;
  }
  return count;
}

std::string_view ltrim_blanks(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.substr(i);
}

std::int64_t count_bullets(std::string_view s) {
  std::int64_t count = 0;
  for (auto line : text::split_lines(s)) {
    auto t = ltrim_blanks(line);
    if (t.starts_with("* ") || t.starts_with("- ")) ++count;
  }
  return count;
}

bool has_title(std::string_view s) {
  for (auto line : text::split_lines(s)) {
    for (std::size_t i = line.find("<<"); i != std::string_view::npos; i = line.find("<<", i + 1)) {
      std::size_t close = line.find(">>", i + 2);
      if (close == std::string_view::npos) break;
      auto content = line.substr(i + 2, close - i - 2);
      if (content.find_first_of("<>") == std::string_view::npos && !text::trim(content).empty()) {
        return true;
      }
    }
  }
  return false;
}

bool has_postscript(std::string_view s, std::string_view marker) {
  for (auto line : text::split_lines(s)) {
    if (text::trim(line).starts_with(marker)) return true;
  }
  return false;
}

bool is_valid_json(std::string_view s) {
  std::string_view t = text::trim(s);
  if (t.starts_with("```")) {
    std::size_t nl = t.find('\n');
    t = nl == std::string_view::npos ? std::string_view{} : t.substr(nl + 1);
    t = text::trim(t);
    if (t.ends_with("```")) t = text::trim(t.substr(0, t.size() - 3));
  }
  return Json::accept(t);
}

std::int64_t count_letters_in_range(std::string_view s, char lo, char hi) {
  return std::count_if(s.begin(), s.end(), [&](char c) { return c >= lo && c <= hi; });
}

std::int64_t count_capital_words(std::string_view s) {
  std::int64_t count = 0;
  for (auto w : text::words(s)) {
    bool has_upper = count_letters_in_range(w, 'A', 'Z') > 0;
    bool has_lower = count_letters_in_range(w, 'a', 'z') > 0;
    if (has_upper && !has_lower) ++count;
  }
  return count;
}

bool relation_holds(std::string_view relation, std::int64_t value, std::int64_t n) {
  if (relation == "at_least") return value >= n;
  if (relation == "at_most") return value <= n;
  return value == n;
}

CheckResult check_text(std::string_view s, const ConstraintSpec& spec, const VariantSchema& v) {
  CheckResult r;
  const std::string& name = v.name;
  switch (spec.category) {
    case Category::kKeywords: {
      if (name == "frequency") {
        auto c = count_keyword(s, str_param(spec, "keyword"));
        r.detail["keyword_count"] = c;
        r.pass = c >= int_param(spec, "min_count");
      } else {
        auto c = count_keyword(s, str_param(spec, "forbidden"));
        r.detail["keyword_count"] = c;
        r.pass = c == 0;
      }
      break;
    }
    case Category::kLanguage: {
      auto counts = text::count_letters(s, str_param(spec, "language"));
      r.detail["target_letters"] = counts.target;
      r.detail["alphabetic_letters"] = counts.alphabetic;
      r.pass = text::mostly_in_language(counts);
      break;
    }
    case Category::kLengthConstraints: {
      const std::string& unit = str_param(spec, "unit");
      std::int64_t c = 0;
      if (unit == "words") {
        c = static_cast<std::int64_t>(text::count_words(s));
        r.detail["word_count"] = c;
      } else if (unit == "sentences") {
        c = count_sentences(s);
        r.detail["sentence_count"] = c;
      } else {
        c = count_paragraphs(s);
        r.detail["paragraph_count"] = c;
      }
      r.pass = relation_holds(str_param(spec, "relation"), c, int_param(spec, "n"));
      break;
    }
    case Category::kDetectableContent: {
      if (name == "placeholders") {
        auto c = count_placeholders(s);
        r.detail["placeholder_count"] = c;
        r.pass = c >= int_param(spec, "placeholders");
      } else {
        bool found = has_postscript(s, str_param(spec, "postscript"));
        r.detail["postscript_found"] = found;
        r.pass = found;
      }
      break;
    }
    case Category::kDetectableFormat: {
      if (name == "bullets") {
        auto c = count_bullets(s);
        r.detail["bullet_count"] = c;
        r.pass = c == int_param(spec, "bullets");
      } else if (name == "title") {
        bool found = has_title(s);
        r.detail["title_found"] = found;
        r.pass = found;
      } else if (name == "json") {
        bool ok = is_valid_json(s);
        r.detail["valid_json"] = ok;
        r.pass = ok;
      } else {
        auto c = count_highlights(s);
        r.detail["highlight_count"] = c;
        r.pass = c >= int_param(spec, "highlights");
      }
      break;
    }
    case Category::kChangeCases: {
      if (name == "all_uppercase") {
        auto c = count_letters_in_range(s, 'a', 'z');
        r.detail["lowercase_letters"] = c;
        r.pass = c == 0;
      } else if (name == "all_lowercase") {
        auto c = count_letters_in_range(s, 'A', 'Z');
        r.detail["uppercase_letters"] = c;
        r.pass = c == 0;
      } else {
        auto c = count_capital_words(s);
        r.detail["capital_word_count"] = c;
        r.pass = relation_holds(str_param(spec, "relation"), c, int_param(spec, "capital_words"));
      }
      break;
    }
    case Category::kStartEndWith: {
      r.pass = true;
      if (spec.params.count("start_with")) {
        bool ok = s.starts_with(str_param(spec, "start_with"));
        r.detail["starts_with"] = ok;
        r.pass = r.pass && ok;
      }
      if (spec.params.count("end_with")) {
        bool ok = s.ends_with(str_param(spec, "end_with"));
        r.detail["ends_with"] = ok;
        r.pass = r.pass && ok;
      }
      if (name == "wrap_quotes") {
        bool ok = s.size() >= 2 && s.front() == '"' && s.back() == '"';
        r.detail["wrapped_in_quotes"] = ok;
        r.pass = ok;
      }
      break;
    }
    case Category::kPunctuation: {
      char c = str_param(spec, "forbid").at(0);
      auto n = static_cast<std::int64_t>(std::count(s.begin(), s.end(), c));
      r.detail["forbidden_count"] = n;
      r.pass = n == 0;
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Loose relaxations

const char* const kPreamblePrefixes[] = {"sure",    "certainly", "of course", "absolutely",
                                         "okay",    "here is",   "here's",    "here are",
                                         "below is", "below are"};

const char* const kSignoffPrefixes[] = {"let me know", "i hope",   "hope this", "feel free",
                                        "best regards", "regards", "thanks",    "thank you",
                                        "cheers",      "sincerely", "enjoy",    "happy to help",
                                        "good luck"};

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

template <std::size_t N>
bool starts_with_phrase(std::string_view line, const char* const (&prefixes)[N]) {
  std::string lower = text::to_lower_ascii(text::trim(line));
  for (const char* p : prefixes) {
    std::string_view pv(p);
    if (std::string_view(lower).starts_with(pv) &&
        (lower.size() == pv.size() || !is_ascii_letter(lower[pv.size()]))) {
      return true;
    }
  }
  return false;
}

std::string join_lines(const std::vector<std::string_view>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

}  // namespace

std::string strip_emphasis(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '*') continue;
    if (c == '_') {
      bool inner = i > 0 && i + 1 < s.size() && is_ascii_alnum(s[i - 1]) && is_ascii_alnum(s[i + 1]);
      if (!inner) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string drop_preamble(std::string_view s) {
  auto lines = text::split_lines(s);
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  if (first == lines.size()) return std::string(s);
  bool more = false;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (!is_blank(lines[i])) more = true;
  }
  if (!more || !starts_with_phrase(lines[first], kPreamblePrefixes)) return std::string(s);
  return join_lines(lines, first + 1, lines.size());
}

std::string drop_signoff(std::string_view s) {
  auto lines = text::split_lines(s);
  std::size_t last = lines.size();
  while (last > 0 && is_blank(lines[last - 1])) --last;
  if (last == 0) return std::string(s);
  bool more = false;
  for (std::size_t i = 0; i + 1 < last; ++i) {
    if (!is_blank(lines[i])) more = true;
  }
  if (!more || !starts_with_phrase(lines[last - 1], kSignoffPrefixes)) return std::string(s);
  return join_lines(lines, 0, last - 1);
}

const std::vector<std::string>& loose_variant_names() {
  static const std::vector<std::string> names = {
      "original", "trim",      "emph",      "pre",          "sign",
      "emph+pre", "emph+sign", "pre+sign",  "emph+pre+sign"};
  return names;
}

std::string relax(std::string_view response, std::string_view variant_name) {
  if (variant_name == "original") return std::string(response);
  auto has = [&](std::string_view part) {
    std::size_t start = 0;
    for (;;) {
      std::size_t plus = variant_name.find('+', start);
      auto piece = variant_name.substr(start, plus == std::string_view::npos ? std::string_view::npos
                                                                              : plus - start);
      if (piece == part) return true;
      if (plus == std::string_view::npos) return false;
      start = plus + 1;
    }
  };
  std::string s(response);
  if (has("emph")) s = strip_emphasis(s);
  if (has("pre")) s = drop_preamble(s);
  if (has("sign")) s = drop_signoff(s);
  return text::trim_copy(s);
}

void validate(const ConstraintSpec& spec) { validated_variant(spec); }

std::string variant_of(const ConstraintSpec& spec) { return validated_variant(spec).name; }

CheckResult check(std::string_view response, const ConstraintSpec& spec, CheckMode mode) {
  const VariantSchema& v = validated_variant(spec);
  if (mode == CheckMode::kStrict) return check_text(response, spec, v);

  const auto& names = loose_variant_names();
  CheckResult last;
  for (const auto& name : names) {
    CheckResult r = check_text(relax(response, name), spec, v);
    if (r.pass) {
      r.detail["loose_variant"] = name;
      return r;
    }
    last = std::move(r);
  }
  last.detail["loose_variant"] = std::string("none");
  return last;
}

void check_compatible(const std::vector<ConstraintSpec>& specs) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      const auto& a = specs[i];
      const auto& b = specs[j];
      if (a.category != b.category) continue;
      bool clash = false;
      if (a.category == Category::kChangeCases) {
        clash = true;
      } else if (a.category == Category::kStartEndWith) {
        bool quotes = a.params.count("wrap_quotes") || b.params.count("wrap_quotes");
        bool both_start = a.params.count("start_with") && b.params.count("start_with");
        bool both_end = a.params.count("end_with") && b.params.count("end_with");
        clash = quotes || both_start || both_end;
      }
      if (clash) {
        throw Error(ErrorKind::kCompatibility,
                    "incompatible constraints: " + variant_of(a) + " and " + variant_of(b) + " (" +
                        std::string(to_string(a.category)) + ")");
      }
    }
  }
}

std::string injection_sentence(const ConstraintSpec& spec) {
  return render_template(validated_variant(spec).injection, spec);
}

EvalQuestion question_for(const ConstraintSpec& spec) {
  EvalQuestion q;
  q.kind = QuestionKind::kVerifiable;
  q.text = render_template(validated_variant(spec).question, spec);
  q.id = question_id_for(q.text);
  q.constraint = spec;
  return q;
}

Instruction inject_constraints(const Instruction& instruction, const std::vector<ConstraintSpec>& specs,
                               std::uint64_t rng_seed) {
  if (specs.empty() || specs.size() > 3) {
    throw Error(ErrorKind::kCompatibility, "inject 1 to 3 constraints, got " + std::to_string(specs.size()));
  }
  for (const auto& s : specs) validate(s);
  std::vector<ConstraintSpec> all = instruction.constraints;
  all.insert(all.end(), specs.begin(), specs.end());
  if (all.size() > 3) throw Error(ErrorKind::kCompatibility, "instruction would carry more than 3 constraints");
  check_compatible(all);

  std::vector<ConstraintSpec> ordered = specs;
  Rng rng(derive_seed(rng_seed, "inject"));
  rng.shuffle(ordered);

  Instruction out;
  out.id = instruction.id + ":c" + std::to_string(rng_seed);
  out.text = text::trim_copy(instruction.text);
  out.constraints = instruction.constraints;
  for (const auto& s : ordered) {
    out.text += ' ';
    out.text += injection_sentence(s);
    out.constraints.push_back(s);
  }
  return out;
}

namespace {

std::string regex_escape(std::string_view s) {
  static const std::string special = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string alternation(std::vector<std::string> options) {
  std::sort(options.begin(), options.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size() || (a.size() == b.size() && a < b); });
  std::string out = "(";
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out += '|';
    out += regex_escape(options[i]);
  }
  return out + ")";
}

struct Capture {
  enum class Kind { kRaw, kInt, kMap, kNoun } kind = Kind::kRaw;
  std::string param;
  std::string table;
};

struct QuestionMatcher {
  Category category;
  const VariantSchema* variant;
  std::regex pattern;
  std::vector<Capture> captures;
};

std::vector<QuestionMatcher> build_matchers() {
  std::vector<QuestionMatcher> out;
  for (const auto& [category, cs] : schema().categories) {
    for (const auto& v : cs.variants) {
      QuestionMatcher m{category, &v, {}, {}};
      std::string re;
      std::string_view tpl = v.question;
      std::size_t i = 0;
      while (i < tpl.size()) {
        if (tpl[i] != '{') {
          re += regex_escape(tpl.substr(i, 1));
          ++i;
          continue;
        }
        std::size_t close = tpl.find('}', i);
        auto parts = split_colon(tpl.substr(i + 1, close - i - 1));
        if (parts.size() == 1) {
          const ParamSchema* ps = nullptr;
          for (const auto& p : v.params) {
            if (p.name == parts[0]) ps = &p;
          }
          if (ps->type == ParamType::kInt) {
            re += "([0-9]+)";
            m.captures.push_back({Capture::Kind::kInt, parts[0], {}});
          } else if (ps->type == ParamType::kEnum) {
            re += alternation(ps->values);
            m.captures.push_back({Capture::Kind::kRaw, parts[0], {}});
          } else {
            re += "([^\"\\n]+)";
            m.captures.push_back({Capture::Kind::kRaw, parts[0], {}});
          }
        } else if (parts[0] == "map") {
          std::vector<std::string> values;
          for (const auto& [_, text] : schema().maps.at(parts[1])) values.push_back(text);
          re += alternation(values);
          m.captures.push_back({Capture::Kind::kMap, parts[2], parts[1]});
        } else if (parts[0] == "noun") {
          std::vector<std::string> forms;
          for (const auto& [_, f] : schema().nouns.at(parts[1])) {
            forms.push_back(f.first);
            forms.push_back(f.second);
          }
          re += alternation(forms);
          m.captures.push_back({Capture::Kind::kNoun, parts[2], parts[1]});
        } else if (parts[0] == "plural") {
          re += "(?:" + regex_escape(parts[2]) + "|" + regex_escape(parts[3]) + ")";
        }
        i = close + 1;
      }
      m.pattern = std::regex(re);
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace

std::optional<ConstraintSpec> parse_verifiable_question(std::string_view question) {
  static const std::vector<QuestionMatcher> matchers = build_matchers();
  const std::string normalized = normalize_question(question);
  for (const auto& m : matchers) {
    std::smatch match;
    if (!std::regex_match(normalized, match, m.pattern)) continue;
    ConstraintSpec spec;
    spec.category = m.category;
    bool ok = true;
    for (std::size_t k = 0; k < m.captures.size() && ok; ++k) {
      const Capture& cap = m.captures[k];
      std::string value = match[k + 1].str();
      switch (cap.kind) {
        case Capture::Kind::kInt:
          if (value.size() > 12) {
            ok = false;
          } else {
            spec.params[cap.param] = static_cast<std::int64_t>(std::stoll(value));
          }
          break;
        case Capture::Kind::kRaw:
          spec.params[cap.param] = value;
          break;
        case Capture::Kind::kMap: {
          ok = false;
          for (const auto& [key, text] : schema().maps.at(cap.table)) {
            if (text == value) {
              spec.params[cap.param] = key;
              ok = true;
            }
          }
          break;
        }
        case Capture::Kind::kNoun: {
          ok = false;
          for (const auto& [key, forms] : schema().nouns.at(cap.table)) {
            if (forms.first == value || forms.second == value) {
              spec.params[cap.param] = key;
              ok = true;
            }
          }
          break;
        }
      }
    }
    for (const auto& p : m.variant->params) {
      if (p.type == ParamType::kFlag) spec.params[p.name] = true;
    }
    if (!ok) continue;
    try {
      if (question_for(spec).text == normalized) return spec;
    } catch (const Error&) {
      // Captured values outside the schema; not a templated question.
    }
  }
  return std::nullopt;
}

const CategoryWeights& default_weights() {
  static const CategoryWeights weights = [] {
    CategoryWeights w;
    for (const auto& [category, cs] : schema().categories) w[category] = cs.weight;
    return w;
  }();
  return weights;
}

std::vector<ConstraintSpec> sample_constraints(int count, const CategoryWeights& weights,
                                               std::uint64_t rng_seed) {
  if (count < 1 || count > 3) {
    throw Error(ErrorKind::kSampling, "constraint count must be in 1..3, got " + std::to_string(count));
  }
  std::vector<std::pair<Category, double>> pool;
  for (Category c : kAllCategories) {
    auto it = weights.find(c);
    double w = it == weights.end() ? 0.0 : it->second;
    if (!std::isfinite(w) || w < 0) throw Error(ErrorKind::kSampling, "weights must be finite and non-negative");
    if (w > 0) pool.emplace_back(c, w);
  }
  if (pool.empty()) throw Error(ErrorKind::kSampling, "all category weights are zero");
  if (static_cast<std::size_t>(count) > pool.size()) {
    throw Error(ErrorKind::kSampling, "cannot draw " + std::to_string(count) + " distinct categories from " +
                                          std::to_string(pool.size()) + " with positive weight");
  }

  Rng rng(rng_seed);
  std::vector<ConstraintSpec> out;
  for (int k = 0; k < count; ++k) {
    double total = 0;
    for (const auto& [_, w] : pool) total += w;
    double u = rng.uniform01() * total;
    std::size_t chosen = pool.size() - 1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (u < pool[i].second) {
        chosen = i;
        break;
      }
      u -= pool[i].second;
    }
    Category category = pool[chosen].first;
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));

    const auto& variants = schema().categories.at(category).variants;
    const VariantSchema& v = rng.pick(variants);
    ConstraintSpec spec;
    spec.category = category;
    for (const auto& p : v.params) {
      const Json& choices = v.sample.at(p.name);
      const Json& value = choices.at(static_cast<std::size_t>(rng.below(choices.size())));
      if (value.is_boolean()) {
        spec.params[p.name] = value.get<bool>();
      } else if (value.is_number_integer()) {
        spec.params[p.name] = value.get<std::int64_t>();
      } else {
        spec.params[p.name] = value.get<std::string>();
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace pj::constraints
