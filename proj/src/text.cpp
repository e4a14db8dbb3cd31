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

#include "pairjudge/text.hpp"

#include <algorithm>

namespace pj::text {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string trim_copy(std::string_view s) { return std::string(trim(s)); }

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && istarts_with(a, b);
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char x = s[i];
    char y = prefix[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::size_t count_words(std::string_view s) { return words(s).size(); }

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    unsigned char c = byte(i);
    if (c < 0x80) {
      out.push_back(c);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
      min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
      min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
      min = 0x10000;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      unsigned char cc = byte(i + k);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
    } else {
      out.push_back(cp);
      i += static_cast<std::size_t>(len);
    }
  }
  return out;
}

namespace {

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

}  // namespace

Script classify(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return Script::kLatinAscii;
  if (cp < 0xC0) return Script::kNotALetter;
  if (cp == 0xD7 || cp == 0xF7) return Script::kNotALetter;
  if (in(cp, 0x0300, 0x036F)) return Script::kNotALetter;  // combining marks
  if (in(cp, 0x2000, 0x2BFF)) return Script::kNotALetter;  // punctuation, symbols, arrows
  if (in(cp, 0x3000, 0x303F)) return Script::kNotALetter;  // CJK punctuation
  if (in(cp, 0xE000, 0xF8FF)) return Script::kNotALetter;  // private use
  if (in(cp, 0xFE30, 0xFE4F)) return Script::kNotALetter;
  if (in(cp, 0xFF00, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
      in(cp, 0xFF5B, 0xFF65)) {
    return Script::kNotALetter;
  }
  if (in(cp, 0xFFF0, 0xFFFF)) return Script::kNotALetter;
  if (in(cp, 0x1F000, 0x1FAFF)) return Script::kNotALetter;  // emoji
  if (cp <= 0x024F || in(cp, 0x1E00, 0x1EFF)) return Script::kLatinOther;
  if (in(cp, 0x0370, 0x03FF)) return Script::kGreek;
  if (in(cp, 0x0400, 0x04FF)) return Script::kCyrillic;
  if (in(cp, 0x0590, 0x05FF)) return Script::kHebrew;
  if (in(cp, 0x0600, 0x06FF)) return Script::kArabic;
  if (in(cp, 0x0900, 0x097F)) return Script::kDevanagari;
  if (in(cp, 0x0E00, 0x0E7F)) return Script::kThai;
  if (in(cp, 0x1100, 0x11FF) || in(cp, 0xAC00, 0xD7AF)) return Script::kHangul;
  if (in(cp, 0x3040, 0x30FF)) return Script::kKana;
  if (in(cp, 0x3400, 0x4DBF) || in(cp, 0x4E00, 0x9FFF)) return Script::kHan;
  return Script::kOtherLetter;
}

namespace {

bool script_matches(Script s, std::string_view language) {
  if (language == "en") return s == Script::kLatinAscii;
  if (language == "ru") return s == Script::kCyrillic;
  if (language == "el") return s == Script::kGreek;
  if (language == "he") return s == Script::kHebrew;
  if (language == "ar") return s == Script::kArabic;
  if (language == "hi") return s == Script::kDevanagari;
  if (language == "th") return s == Script::kThai;
  if (language == "zh") return s == Script::kHan;
  if (language == "ja") return s == Script::kHan || s == Script::kKana;
  if (language == "ko") return s == Script::kHangul;
  return false;
}

}  // namespace

LetterCounts count_letters(std::string_view s, std::string_view language) {
  LetterCounts counts;
  for (char32_t cp : decode_utf8(s)) {
    Script script = classify(cp);
    if (script == Script::kNotALetter) continue;
    ++counts.alphabetic;
    if (script_matches(script, language)) ++counts.target;
  }
  return counts;
}

bool mostly_in_language(const LetterCounts& counts) {
  return counts.alphabetic > 0 && counts.target * 10 >= counts.alphabetic * 9;
}

bool looks_english(std::string_view s) {
  LetterCounts counts = count_letters(s, "en");
  return counts.alphabetic == 0 || mostly_in_language(counts);
}

}  // namespace pj::text
