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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "pairjudge/pairjudge.h"

namespace {

struct Flags {
  std::string config;
  bool dry_run = false;
  std::string mode;
  std::string rounds;
  std::string seed;
  std::string out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Configuration file")->required();
  cmd->add_flag("--dry-run", f.dry_run, "Validate inputs and print the plan without backend calls");
  cmd->add_option("--mode", f.mode, "Pipeline mode: full, no-refine, no-ft, no-ft-no-mf");
  cmd->add_option("--rounds", f.rounds, "Question sampling rounds");
  cmd->add_option("--seed", f.seed, "Run seed");
  cmd->add_option("--out", f.out, "Output path");
}

int fail_with_last_error(pj_status status) {
  std::fprintf(stderr, "%s\n", pj_last_error());
  return static_cast<int>(status == PJ_ERR_INVALID_ARGUMENT ? PJ_ERR_CONFIG : status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise response judging and judge-corpus tooling"};
  app.set_version_flag("--version", pj_version());
  app.require_subcommand(1);

  Flags flags;
  struct Entry {
    const char* name;
    const char* help;
    pj_status (*fn)(pj_app*, char**);
    CLI::App* cmd = nullptr;
  };
  Entry entries[] = {
      {"build-corpus", "Build the training corpus from preference pairs", pj_build_corpus},
      {"judge", "Judge preference pairs in both response orders", pj_judge},
      {"bench", "Compute accuracy and agreement over judge records", pj_bench},
      {"verify", "Check responses against constraint specs", pj_verify},
  };
  for (auto& e : entries) {
    e.cmd = app.add_subcommand(e.name, e.help);
    add_common(e.cmd, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::string escaped;
    for (char c : msg) {
      if (c == '"' || c == '\\') escaped += '\\';
      if (c == '\n') {
        escaped += "\\n";
        continue;
      }
      escaped += c;
    }
    std::fprintf(stderr, "{\"error\":{\"kind\":\"config\",\"message\":\"%s\"}}\n", escaped.c_str());
    return PJ_ERR_CONFIG;
  }

  pj_app* handle = nullptr;
  pj_status st = pj_app_load(flags.config.c_str(), &handle);
  if (st != PJ_OK) return fail_with_last_error(st);

  const std::pair<const char*, const std::string*> overrides[] = {
      {"mode", &flags.mode}, {"rounds", &flags.rounds}, {"seed", &flags.seed}, {"out", &flags.out}};
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    st = pj_app_set_override(handle, key, value->c_str());
    if (st != PJ_OK) {
      pj_app_free(handle);
      return fail_with_last_error(st);
    }
  }
  if (flags.dry_run) pj_app_set_override(handle, "dry_run", "1");

  for (const auto& e : entries) {
    if (!e.cmd->parsed()) continue;
    char* output = nullptr;
    st = e.fn(handle, &output);
    if (output) {
      std::fputs(output, stdout);
      pj_string_free(output);
    }
    pj_app_free(handle);
    return st == PJ_OK ? 0 : fail_with_last_error(st);
  }
  pj_app_free(handle);
  return PJ_ERR_CONFIG;
}
