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

#include <cstdlib>

#include "httplib.h"
#include "pairjudge/gateway.hpp"

namespace pj::gateway {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::kConfig, "endpoint_url needs a scheme: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorKind::kConfig, "unsupported scheme in " + url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw Error(ErrorKind::kConfig, "built without TLS support: " + url);
#endif
  auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return out;
}

}  // namespace

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  parse_url(config_.endpoint_url);
  if (config_.model_name.empty()) throw Error(ErrorKind::kConfig, "http backend needs model_name");
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key) throw Error(ErrorKind::kConfig, "environment variable " + config_.api_key_env + " is not set");
    api_key_ = key;
  }
}

std::string HttpBackend::generate(const ChatRequest& request) {
  ParsedUrl url = parse_url(config_.endpoint_url);
  httplib::Client client(url.origin);
  auto seconds = static_cast<time_t>(config_.timeout_s);
  auto micros = static_cast<time_t>((config_.timeout_s - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  Json body{{"model", config_.model_name},
            {"temperature", request.params.temperature},
            {"max_tokens", request.params.max_tokens},
            {"stream", false}};
  if (request.params.seed) body["seed"] = *request.params.seed;
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.text}});
  }
  body["messages"] = messages;

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransientError("request to " + config_.endpoint_url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransientError("HTTP " + std::to_string(res->status) + " from " + config_.endpoint_url);
  }
  if (res->status != 200) {
    throw Error(ErrorKind::kTransport, "HTTP " + std::to_string(res->status) + " from " + config_.endpoint_url +
                                           ": " + res->body.substr(0, 200));
  }
  try {
    Json reply = Json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kTransport, std::string("unexpected completion payload: ") + e.what());
  }
}

}  // namespace pj::gateway
