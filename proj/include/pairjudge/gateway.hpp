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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/error.hpp"

namespace pj::gateway {

enum class Role { kSystem, kUser, kAssistant };

enum class Purpose {
  kQuestionGen,
  kTextAnalysis,
  kCodeGen,
  kExplain,
  kConsistencyCheck,
  kRefine,
  kDirectJudge,
};

std::string_view to_string(Role r);
std::string_view to_string(Purpose p);
std::optional<Purpose> parse_purpose(std::string_view name);

struct GenParams {
  double temperature = 0.0;
  int max_tokens = 2048;
  std::optional<std::int64_t> seed;
};

struct Message {
  Role role = Role::kUser;
  std::string text;
};

struct ChatRequest {
  std::vector<Message> messages;
  GenParams params;
  Purpose purpose = Purpose::kQuestionGen;
};

/// Stable request key: FNV-1a 64 over a length-prefixed encoding of the
/// purpose tag, each (role, text), the temperature in thousandths, and the
/// seed when set. 16 lowercase hex digits.
std::string fingerprint(const ChatRequest& request);

Json to_json(const ChatRequest& request);
ChatRequest chat_request_from_json(const Json& j);

/// Backend failure that is worth retrying (connection reset, 429, 5xx).
class TransientError : public Error {
 public:
  explicit TransientError(const std::string& message) : Error(ErrorKind::kTransport, message) {}
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string generate(const ChatRequest& request) = 0;
  virtual std::string identity() const = 0;
};

/// Canned replies keyed by request fingerprint.
struct MockScript {
  std::map<std::string, std::string> entries;
  bool strict = true;
  std::string fallback_reply;

  void add(const ChatRequest& request, std::string reply);
  /// One JSON object per line: {"fingerprint", "reply"}.
  static MockScript load(const std::string& path, bool strict = true);
  void save(const std::string& path) const;
};

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script, std::string name = "mock")
      : script_(std::move(script)), name_(std::move(name)) {}

  std::string generate(const ChatRequest& request) override;
  std::string identity() const override { return "mock:" + name_; }

 private:
  MockScript script_;
  std::string name_;
};

/// Adapts a function to the Backend interface; used for oracles in tests and
/// for programmatic backends.
class CallbackBackend final : public Backend {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  CallbackBackend(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

  std::string generate(const ChatRequest& request) override { return fn_(request); }
  std::string identity() const override { return "callback:" + name_; }

 private:
  Fn fn_;
  std::string name_;
};

/// Forwards to another backend and captures every exchange as a mock script.
class RecordingBackend final : public Backend {
 public:
  explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  std::string generate(const ChatRequest& request) override;
  std::string identity() const override { return inner_->identity(); }
  MockScript script() const;

 private:
  std::shared_ptr<Backend> inner_;
  mutable std::mutex mu_;
  MockScript recorded_;
};

struct HttpConfig {
  std::string endpoint_url;  // full chat-completions URL
  std::string model_name;
  std::string api_key_env;   // name of the environment variable holding the key
  double timeout_s = 60.0;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);

  std::string generate(const ChatRequest& request) override;
  std::string identity() const override { return "http:" + config_.model_name + "@" + config_.endpoint_url; }

 private:
  HttpConfig config_;
  std::string api_key_;
};

struct RetryPolicy {
  int budget = 3;
  std::chrono::milliseconds base_delay{500};
  double jitter = 0.5;  // extra delay fraction drawn uniformly from [0, jitter)
};

struct GatewayOptions {
  RetryPolicy retry;
  int max_in_flight = 8;
  std::string audit_log_path;  // empty disables logging
  std::function<void(std::chrono::milliseconds)> sleeper;  // defaults to this_thread::sleep_for
  std::uint64_t jitter_seed = 0;
};

/// The single door to text generation: retry with backoff, a concurrency cap,
/// and an optional audit log.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  std::string complete(const ChatRequest& request);
  std::string identity() const { return backend_->identity(); }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  void audit(const ChatRequest& request, const std::string& fp, const std::string& reply, int attempts);
  std::chrono::milliseconds backoff(int attempt);

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  std::counting_semaphore<4096> in_flight_;
  std::mutex mu_;
  std::uint64_t jitter_state_;
  std::atomic<std::uint64_t> calls_{0};
};

inline std::string complete(const ChatRequest& request, Gateway& backend) {
  return backend.complete(request);
}

enum class TemplateId {
  kCorpusQuestionGen,
  kAnalyzerQuestionGen,
  kCorpusTextAnalysis,
  kAnalyzerAnalysis,
  kCodeGen,
  kAnalyzerCodeGen,
  kExplain,
  kConsistencyCheck,
  kRefine,
  kDirectJudge,
};

std::string_view to_string(TemplateId id);

using Slots = std::map<std::string, std::string>;

/// Substitutes {{slot}} markers in the shipped template. Throws
/// Error(kTemplate) naming every missing slot.
ChatRequest render_prompt(TemplateId id, const Slots& slots);
std::vector<std::string> required_slots(TemplateId id);
std::string templates_version();

}  // namespace pj::gateway
