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
#include <string>
#include <string_view>
#include <vector>

namespace pj::text {

bool is_space(char c);
std::string_view trim(std::string_view s);
std::string trim_copy(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// Splits on '\n' only; the pieces keep any '\r'.
std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Maximal runs of ASCII non-whitespace.
std::vector<std::string_view> words(std::string_view s);
std::size_t count_words(std::string_view s);

/// Decodes UTF-8; malformed bytes decode to U+FFFD one byte at a time.
std::vector<char32_t> decode_utf8(std::string_view s);

enum class Script {
  kLatinAscii,
  kLatinOther,
  kCyrillic,
  kGreek,
  kHebrew,
  kArabic,
  kDevanagari,
  kThai,
  kHan,
  kKana,
  kHangul,
  kOtherLetter,
  kNotALetter,
};

/// Coarse character-class table. Anything outside the known punctuation,
/// symbol, and emoji blocks at or above U+00C0 counts as a letter.
Script classify(char32_t cp);

struct LetterCounts {
  std::int64_t target = 0;
  std::int64_t alphabetic = 0;
};

/// Counts letters whose script belongs to `language` ("en", "ru", "zh", ...)
/// against all letters. Unknown language codes count zero targets.
LetterCounts count_letters(std::string_view s, std::string_view language);

/// True when at least 90% of letters belong to `language`.
bool mostly_in_language(const LetterCounts& counts);

/// Default English predicate for dataset filtering: no letters counts as
/// English, otherwise the 90% ASCII-letter rule.
bool looks_english(std::string_view s);

}  // namespace pj::text
