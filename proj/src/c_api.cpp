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

#include "pairjudge/pairjudge.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "pairjudge/commands.hpp"
#include "pairjudge/config.hpp"
#include "pairjudge/constraints.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/scripts.hpp"

struct pj_app {
  pj::config::AppConfig config;
  pj::config::Overrides overrides;
};

namespace {

thread_local std::string last_error;

void set_error(std::string_view kind, const std::string& message) {
  last_error = pj::Json{{"error", {{"kind", std::string(kind)}, {"message", message}}}}.dump();
}

pj_status status_of(pj::ErrorCategory c) {
  switch (c) {
    case pj::ErrorCategory::kConfig: return PJ_ERR_CONFIG;
    case pj::ErrorCategory::kInfrastructure: return PJ_ERR_INFRASTRUCTURE;
    case pj::ErrorCategory::kData: return PJ_ERR_DATA;
  }
  return PJ_ERR_DATA;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

template <typename Fn>
pj_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return PJ_OK;
  } catch (const pj::Error& e) {
    set_error(pj::to_string(e.kind()), e.what());
    return status_of(e.category());
  } catch (const std::bad_alloc&) {
    set_error("io", "out of memory");
    return PJ_ERR_INFRASTRUCTURE;
  } catch (const std::exception& e) {
    set_error("io", e.what());
    return PJ_ERR_INFRASTRUCTURE;
  }
}

pj_status invalid(const char* message) {
  set_error("invalid_argument", message);
  return PJ_ERR_INVALID_ARGUMENT;
}

pj_status run_command(pj_app* app, pj::config::Command command, char** output) {
  if (!app) return invalid("app handle is null");
  return guarded([&] {
    std::string text = pj::commands::run(command, app->config, app->overrides);
    if (output) *output = dup_string(text);
  });
}

}  // namespace

extern "C" {

pj_status pj_app_load(const char* config_path, pj_app** out) {
  if (!config_path || !out) return invalid("config_path and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    auto app = std::make_unique<pj_app>();
    app->config = pj::config::load_config(config_path);
    *out = app.release();
  });
}

void pj_app_free(pj_app* app) { delete app; }

pj_status pj_app_set_override(pj_app* app, const char* key, const char* value) {
  if (!app || !key || !value) return invalid("app, key and value must be non-null");
  return guarded([&] {
    std::string k(key);
    std::string v(value);
    auto bad = [&](const std::string& why) { throw pj::Error(pj::ErrorKind::kConfig, "--" + k + ": " + why); };
    auto parse_uint = [&]() -> unsigned long long {
      if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) bad("expected a non-negative integer");
      try {
        return std::stoull(v);
      } catch (const std::exception&) {
        bad("integer out of range");
      }
      return 0;
    };
    if (k == "out") {
      app->overrides.out = v;
    } else if (k == "seed") {
      app->overrides.seed = parse_uint();
    } else if (k == "rounds") {
      auto r = parse_uint();
      if (r < 1 || r > 1000) bad("expected an integer between 1 and 1000");
      app->overrides.rounds = static_cast<int>(r);
    } else if (k == "mode") {
      auto m = pj::judge::parse_mode(v);
      if (!m) bad("expected one of full, no-refine, no-ft, no-ft-no-mf");
      app->overrides.mode = *m;
    } else if (k == "dry_run") {
      app->overrides.dry_run = v == "1" || v == "true";
    } else {
      throw pj::Error(pj::ErrorKind::kInvalidArgument, "unknown override " + k);
    }
  });
}

pj_status pj_build_corpus(pj_app* app, char** output) {
  return run_command(app, pj::config::Command::kBuildCorpus, output);
}

pj_status pj_judge(pj_app* app, char** output) { return run_command(app, pj::config::Command::kJudge, output); }

pj_status pj_bench(pj_app* app, char** output) { return run_command(app, pj::config::Command::kBench, output); }

pj_status pj_verify(pj_app* app, char** output) { return run_command(app, pj::config::Command::kVerify, output); }

pj_status pj_check_constraint(const char* response, const char* spec_json, int strict, char** result_json) {
  if (!response || !spec_json || !result_json) return invalid("arguments must be non-null");
  return guarded([&] {
    pj::Json j;
    try {
      j = pj::Json::parse(spec_json);
    } catch (const pj::Json::exception& e) {
      throw pj::Error(pj::ErrorKind::kSpec, std::string("spec is not JSON: ") + e.what());
    }
    auto spec = pj::constraint_spec_from_json(j);
    auto mode = strict ? pj::constraints::CheckMode::kStrict : pj::constraints::CheckMode::kLoose;
    *result_json = dup_string(pj::constraints::to_json(pj::constraints::check(response, spec, mode)).dump());
  });
}

pj_status pj_normalize_question(const char* text, char** out) {
  if (!text || !out) return invalid("arguments must be non-null");
  return guarded([&] { *out = dup_string(pj::normalize_question(text)); });
}

pj_status pj_extract_fenced_code(const char* markdown, const char* tag, char** out) {
  if (!markdown || !tag || !out) return invalid("arguments must be non-null");
  return guarded([&] { *out = dup_string(pj::scripts::extract_fenced_code(markdown, tag)); });
}

pj_status pj_fingerprint(const char* request_json, char** out) {
  if (!request_json || !out) return invalid("arguments must be non-null");
  return guarded([&] {
    pj::Json j;
    try {
      j = pj::Json::parse(request_json);
    } catch (const pj::Json::exception& e) {
      throw pj::Error(pj::ErrorKind::kInput, std::string("request is not JSON: ") + e.what());
    }
    *out = dup_string(pj::gateway::fingerprint(pj::gateway::chat_request_from_json(j)));
  });
}

const char* pj_last_error(void) { return last_error.c_str(); }

void pj_string_free(char* s) { std::free(s); }

const char* pj_version(void) { return "0.3.0"; }

}  // extern "C"
