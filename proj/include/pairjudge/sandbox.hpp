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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairjudge/core.hpp"

namespace pj::sandbox {

enum class Status { kOk, kTimeout, kCrash, kProtocolError, kLimitExceeded };

std::string_view to_string(Status s);
std::optional<Status> parse_status(std::string_view s);

struct Limits {
  std::int64_t wall_ms = 5000;
  std::int64_t memory_mb = 256;
  std::int64_t output_kb = 64;
};

struct ExecRequest {
  std::string source;
  std::string entry_name;
  std::string response_text;
  Limits limits;
};

struct ExecResult {
  Status status = Status::kCrash;
  std::optional<Json> value;  // a JSON object, present iff status is ok
  std::string stderr_excerpt;
  std::int64_t wall_ms = 0;

  bool ok() const { return status == Status::kOk; }
};

// Wire protocol: one JSON object per direction, newline terminated.
std::string encode_request(const ExecRequest& request);
ExecRequest decode_request(std::string_view line);
std::string encode_result(const ExecResult& result);
/// Throws Error(kSandbox) when the reply breaks the protocol.
ExecResult decode_result(std::string_view line);

Json to_json(const ExecResult& result);

/// "{...value json...}" for ok results, otherwise "<status>: <first stderr line>".
std::string render_feedback(const ExecResult& result);

class Sandbox {
 public:
  virtual ~Sandbox() = default;
  /// Throws Error(kSandbox) when the runner cannot be reached or answers
  /// outside the protocol. Script failures come back as a status.
  virtual ExecResult execute(const ExecRequest& request) = 0;
  virtual std::string dialect() const = 0;
  virtual std::string identity() const = 0;
};

/// Spawns `argv` once per request and speaks the wire protocol over its
/// stdin/stdout. The host kills the runner at wall_ms + slack_ms.
class SubprocessSandbox final : public Sandbox {
 public:
  SubprocessSandbox(std::vector<std::string> argv, std::string dialect = "python",
                    std::int64_t slack_ms = 1000);

  ExecResult execute(const ExecRequest& request) override;
  std::string dialect() const override { return dialect_; }
  std::string identity() const override;

 private:
  std::vector<std::string> argv_;
  std::string dialect_;
  std::int64_t slack_ms_;
};

/// Stand-in when no runner is configured: every execution reports a crash,
/// so script paths degrade to text analysis.
class StubSandbox final : public Sandbox {
 public:
  explicit StubSandbox(std::string dialect = "python") : dialect_(std::move(dialect)) {}

  ExecResult execute(const ExecRequest& request) override;
  std::string dialect() const override { return dialect_; }
  std::string identity() const override { return "stub"; }

 private:
  std::string dialect_;
};

}  // namespace pj::sandbox
