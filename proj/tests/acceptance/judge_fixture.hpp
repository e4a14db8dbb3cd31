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

// The ten-pair judge fixture: pairs, config and frozen mock live in
// tests/fixtures/judge. The rules below produced the mock.

#include <string>

#include "oracle_backend.hpp"

namespace pj::testing {

std::string judge_fixture_dir();
OracleRules judge_fixture_rules();

/// Runs the judge command on the fixture config, writing records to `out`.
/// Returns the command's stdout text.
std::string run_judge_fixture(const std::string& out, const std::string& mode = "full");

/// Hex FNV-1a digest of a file's bytes.
std::string file_digest(const std::string& path);

}  // namespace pj::testing
