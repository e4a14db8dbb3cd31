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

// Test doubles for script execution. Generated "scripts" in fixtures carry a
// marker line such as "# behavior: word_count"; the doubles run the named
// native behavior instead of interpreting the source.

#include <atomic>
#include <functional>
#include <map>
#include <string>

#include "pairjudge/sandbox.hpp"

namespace pj::testing {

/// Runs the behavior named by the source's marker line.
sandbox::ExecResult run_behavior(const sandbox::ExecRequest& request);

/// Marker line for a behavior, e.g. behavior_source("word_count").
std::string behavior_source(const std::string& behavior, const std::string& entry = "evaluate");

/// In-process sandbox over run_behavior. Counts executions.
class NativeSandbox final : public sandbox::Sandbox {
 public:
  explicit NativeSandbox(std::string dialect = "python") : dialect_(std::move(dialect)) {}

  sandbox::ExecResult execute(const sandbox::ExecRequest& request) override;
  std::string dialect() const override { return dialect_; }
  std::string identity() const override { return "native-test"; }
  int executions() const { return executions_.load(); }

 private:
  std::string dialect_;
  std::atomic<int> executions_{0};
};

/// Sandbox whose runner is unreachable: every call is an infrastructure error.
class BrokenSandbox final : public sandbox::Sandbox {
 public:
  sandbox::ExecResult execute(const sandbox::ExecRequest& request) override;
  std::string dialect() const override { return "python"; }
  std::string identity() const override { return "broken-test"; }
};

}  // namespace pj::testing
