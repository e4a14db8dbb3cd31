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

#include <string>
#include <vector>

#include "pairjudge/config.hpp"

namespace pj::commands {

/// Each command validates the whole configuration first, then runs, writes
/// its output files, and returns the text meant for standard output.
std::string build_corpus(config::AppConfig config, const config::Overrides& overrides);
std::string judge(config::AppConfig config, const config::Overrides& overrides);
std::string bench(config::AppConfig config, const config::Overrides& overrides);
std::string verify(config::AppConfig config, const config::Overrides& overrides);

std::string run(config::Command command, config::AppConfig config, const config::Overrides& overrides);

/// Writes through a temporary file renamed into place. Throws Error(kIo).
void write_file_atomic(const std::string& path, const std::string& content);

struct JsonLine {
  std::size_t line = 0;  // 1-based
  Json value;
};

/// Non-blank lines of a JSONL file, parsed. Throws Error(kIo) or
/// Error(kMalformedRecord) naming the line.
std::vector<JsonLine> read_jsonl(const std::string& path);

}  // namespace pj::commands
