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

#include "pairjudge/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pj::gateway {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(Purpose p) {
  switch (p) {
    case Purpose::kQuestionGen: return "QuestionGen";
    case Purpose::kTextAnalysis: return "TextAnalysis";
    case Purpose::kCodeGen: return "CodeGen";
    case Purpose::kExplain: return "Explain";
    case Purpose::kConsistencyCheck: return "ConsistencyCheck";
    case Purpose::kRefine: return "Refine";
    case Purpose::kDirectJudge: return "DirectJudge";
  }
  return "?";
}

std::optional<Purpose> parse_purpose(std::string_view name) {
  for (Purpose p : {Purpose::kQuestionGen, Purpose::kTextAnalysis, Purpose::kCodeGen, Purpose::kExplain,
                    Purpose::kConsistencyCheck, Purpose::kRefine, Purpose::kDirectJudge}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

namespace {

void put_field(std::string& out, std::string_view bytes) {
  out += std::to_string(bytes.size());
  out += ':';
  out.append(bytes);
  out += ';';
}

std::optional<Role> parse_role(std::string_view name) {
  for (Role r : {Role::kSystem, Role::kUser, Role::kAssistant}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

}  // namespace

std::string fingerprint(const ChatRequest& request) {
  std::string canon = "pj-fp-v1;";
  put_field(canon, to_string(request.purpose));
  put_field(canon, std::to_string(request.messages.size()));
  for (const auto& m : request.messages) {
    put_field(canon, to_string(m.role));
    put_field(canon, m.text);
  }
  put_field(canon, std::to_string(std::llround(request.params.temperature * 1000.0)));
  if (request.params.seed) put_field(canon, "seed=" + std::to_string(*request.params.seed));
  return hex64(fnv1a64(canon));
}

Json to_json(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.text}});
  }
  Json params{{"temperature", request.params.temperature}, {"max_tokens", request.params.max_tokens}};
  if (request.params.seed) params["seed"] = *request.params.seed;
  return Json{{"purpose", std::string(to_string(request.purpose))}, {"messages", messages}, {"params", params}};
}

ChatRequest chat_request_from_json(const Json& j) {
  ChatRequest r;
  auto purpose = parse_purpose(j.at("purpose").get<std::string>());
  if (!purpose) throw Error(ErrorKind::kInput, "unknown purpose tag");
  r.purpose = *purpose;
  for (const auto& m : j.at("messages")) {
    auto role = parse_role(m.at("role").get<std::string>());
    if (!role) throw Error(ErrorKind::kInput, "unknown message role");
    r.messages.push_back({*role, m.at("content").get<std::string>()});
  }
  if (j.contains("params")) {
    const Json& p = j["params"];
    r.params.temperature = p.value("temperature", 0.0);
    r.params.max_tokens = p.value("max_tokens", 2048);
    if (p.contains("seed")) r.params.seed = p["seed"].get<std::int64_t>();
  }
  return r;
}

void MockScript::add(const ChatRequest& request, std::string reply) {
  entries[fingerprint(request)] = std::move(reply);
}

MockScript MockScript::load(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open mock script '" + path + "'");
  MockScript script;
  script.strict = strict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      Json j = Json::parse(line);
      std::string fp = j.at("fingerprint").get<std::string>();
      if (script.entries.count(fp)) {
        throw Error(ErrorKind::kConfig, "duplicate fingerprint " + fp + " in mock script line " +
                                            std::to_string(lineno));
      }
      script.entries[fp] = j.at("reply").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kConfig, "bad mock script line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return script;
}

void MockScript::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write mock script '" + path + "'");
  for (const auto& [fp, reply] : entries) {
    out << Json{{"fingerprint", fp}, {"reply", reply}}.dump() << '\n';
  }
}

std::string MockBackend::generate(const ChatRequest& request) {
  const std::string fp = fingerprint(request);
  auto it = script_.entries.find(fp);
  if (it != script_.entries.end()) return it->second;
  if (script_.strict) {
    throw Error(ErrorKind::kPlayback, "no mock reply for fingerprint " + fp + " (purpose " +
                                          std::string(to_string(request.purpose)) + ")");
  }
  return script_.fallback_reply;
}

std::string RecordingBackend::generate(const ChatRequest& request) {
  std::string reply = inner_->generate(request);
  std::lock_guard lock(mu_);
  recorded_.add(request, reply);
  return reply;
}

MockScript RecordingBackend::script() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      in_flight_(std::clamp(options_.max_in_flight, 1, 4096)),
      jitter_state_(options_.jitter_seed) {
  if (!backend_) throw Error(ErrorKind::kConfig, "gateway needs a backend");
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::chrono::milliseconds Gateway::backoff(int attempt) {
  double jitter;
  {
    std::lock_guard lock(mu_);
    jitter_state_ = derive_seed(jitter_state_, "jitter");
    jitter = static_cast<double>(jitter_state_ >> 11) * 0x1.0p-53 * options_.retry.jitter;
  }
  double ms = static_cast<double>(options_.retry.base_delay.count()) * std::ldexp(1.0, attempt) * (1.0 + jitter);
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

std::string Gateway::complete(const ChatRequest& request) {
  bool has_user = false;
  for (const auto& m : request.messages) has_user = has_user || m.role == Role::kUser;
  if (!has_user) throw Error(ErrorKind::kInput, "chat request needs at least one user message");

  ++calls_;
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<4096>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const std::string fp = fingerprint(request);
  std::string last_error;
  const int attempts = 1 + std::max(0, options_.retry.budget);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    try {
      std::string reply = backend_->generate(request);
      audit(request, fp, reply, attempt + 1);
      return reply;
    } catch (const TransientError& e) {
      last_error = e.what();
      if (attempt + 1 < attempts) options_.sleeper(backoff(attempt));
    }
  }
  throw Error(ErrorKind::kTransport, "backend " + backend_->identity() + " failed after " +
                                         std::to_string(attempts) + " attempts: " + last_error);
}

void Gateway::audit(const ChatRequest& request, const std::string& fp, const std::string& reply, int attempts) {
  if (options_.audit_log_path.empty()) return;
  std::size_t request_chars = 0;
  for (const auto& m : request.messages) request_chars += m.text.size();
  Json line = to_json(request);
  line["fingerprint"] = fp;
  line["backend"] = backend_->identity();
  line["reply"] = reply;
  line["attempts"] = attempts;
  line["request_chars"] = request_chars;
  line["reply_chars"] = reply.size();
  line["reply_words"] = text::count_words(reply);
  std::lock_guard lock(mu_);
  std::ofstream out(options_.audit_log_path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::kIo, "cannot append to audit log '" + options_.audit_log_path + "'");
  out << line.dump() << '\n';
}

}  // namespace pj::gateway
