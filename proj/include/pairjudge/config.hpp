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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pairjudge/constraints.hpp"
#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/sandbox.hpp"

namespace pj::config {

struct BackendConfig {
  std::string name;
  std::string type;  // "mock" or "http"
  std::string script;
  bool strict = true;
  std::string fallback_reply;
  gateway::HttpConfig http;
  std::string audit_log;
};

struct RetryConfig {
  int budget = 3;
  std::int64_t base_delay_ms = 500;
  double jitter = 0.5;
  int max_in_flight = 8;
};

struct SandboxConfig {
  std::vector<std::string> runner;  // empty selects the stub
  std::string dialect = "python";
  sandbox::Limits limits;
  std::int64_t slack_ms = 1000;
};

struct LoadConfig {
  bool drop_ties = true;
  bool drop_non_english = true;
  bool drop_multi_turn = true;
  std::vector<std::string> tie_sentinels = {"tie"};

  LoadOptions options() const;
};

struct CorpusConfig {
  std::string input;
  std::string out;
  std::string stats;       // default: <out>.stats.json
  std::string scripts;     // default: <out>.scripts.jsonl
  std::string rejections;  // default: <out>.rejections.jsonl
  std::string backend;
  std::optional<std::uint64_t> seed;
  constraints::CategoryWeights weights = constraints::default_weights();
  int workers = 4;
  bool code_samples = true;
  bool shuffle = false;
  int question_retry_budget = 1;
  int retry_budget = 2;
  LoadConfig load;
};

struct JudgeConfig {
  std::string input;
  std::string out;
  std::string manifest;  // default: <out>.manifest.json
  std::string analyzer;
  std::string refiner;   // default: the analyzer
  judge::Mode mode = judge::Mode::kFull;
  int rounds = 1;
  std::optional<double> question_temperature;
  std::optional<std::uint64_t> seed;
  int questions_per_round = 3;
  int retry_budget = 2;
  int workers = 4;
  LoadConfig load;
};

struct BenchConfig {
  std::vector<std::pair<std::string, std::string>> subsets;  // name, records directory
  std::string out_dir;
  std::string consistency;  // optional JSONL of model verdicts on constraint checks
};

struct VerifyConfig {
  std::string responses;
  std::string constraints;
  std::string out;
};

struct AppConfig {
  std::string base_dir;
  std::map<std::string, BackendConfig> backends;
  RetryConfig retry;
  SandboxConfig sandbox;
  std::optional<CorpusConfig> corpus;
  std::optional<JudgeConfig> judge;
  std::optional<BenchConfig> bench;
  std::optional<VerifyConfig> verify;
};

enum class Command { kBuildCorpus, kJudge, kBench, kVerify };
std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<judge::Mode> mode;
  std::optional<int> rounds;
  bool dry_run = false;
};

/// Parses the config file. Relative paths resolve against its directory.
/// Throws Error(kConfig) on any structural problem.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const Json& j, const std::string& base_dir);

/// Applies flag overrides for one command.
void apply_overrides(AppConfig& config, Command command, const Overrides& overrides);

/// Everything the command needs is checked here, before any side effect:
/// sections present, backends referenced exist, seeds explicit, inputs exist.
void validate_for(const AppConfig& config, Command command);

std::shared_ptr<gateway::Backend> make_backend(const BackendConfig& config);
std::shared_ptr<gateway::Gateway> make_gateway(const AppConfig& config, const std::string& backend_name);
std::unique_ptr<sandbox::Sandbox> make_sandbox(const SandboxConfig& config);

}  // namespace pj::config
