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

#include "pairjudge/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "pairjudge/error.hpp"

namespace pj::config {

namespace fs = std::filesystem;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kBuildCorpus: return "build-corpus";
    case Command::kJudge: return "judge";
    case Command::kBench: return "bench";
    case Command::kVerify: return "verify";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::kBuildCorpus, Command::kJudge, Command::kBench, Command::kVerify}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

LoadOptions LoadConfig::options() const {
  LoadOptions o;
  o.drop_ties = drop_ties;
  o.drop_non_english = drop_non_english;
  o.drop_multi_turn = drop_multi_turn;
  o.tie_sentinels = tie_sentinels;
  return o;
}

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::kConfig, "config: " + message); }

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string name, std::string base_dir)
      : j_(j), name_(std::move(name)), base_(std::move(base_dir)) {
    if (!j_.is_object()) fail(name_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string str(const std::string& key, std::string def = "") {
    if (!has(key)) return def;
    if (!j_[key].is_string()) fail(where(key) + " must be a string");
    return j_[key].get<std::string>();
  }

  std::string path(const std::string& key) {
    std::string p = str(key);
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base_) / p).lexically_normal().string();
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    if (!j_[key].is_boolean()) fail(where(key) + " must be a boolean");
    return j_[key].get<bool>();
  }

  std::int64_t integer(const std::string& key, std::int64_t def, std::int64_t min_value) {
    if (!has(key)) return def;
    if (!j_[key].is_number_integer()) fail(where(key) + " must be an integer");
    auto v = j_[key].get<std::int64_t>();
    if (v < min_value) fail(where(key) + " must be at least " + std::to_string(min_value));
    return v;
  }

  std::optional<std::uint64_t> seed(const std::string& key) {
    if (!has(key)) return std::nullopt;
    if (!j_[key].is_number_unsigned() && !(j_[key].is_number_integer() && j_[key].get<std::int64_t>() >= 0)) {
      fail(where(key) + " must be a non-negative integer");
    }
    return j_[key].get<std::uint64_t>();
  }

  double real(const std::string& key, double def, double min_value) {
    if (!has(key)) return def;
    if (!j_[key].is_number()) fail(where(key) + " must be a number");
    double v = j_[key].get<double>();
    if (v < min_value) fail(where(key) + " must be at least " + std::to_string(min_value));
    return v;
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

  void finish() {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail("unknown key " + where(k));
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::string base_;
  std::set<std::string> seen_;
};

LoadConfig parse_load(Section& parent, const std::string& key, const std::string& base) {
  LoadConfig lc;
  if (!parent.has(key)) return lc;
  Section s(parent.raw(key), parent.where(key), base);
  lc.drop_ties = s.flag("drop_ties", true);
  lc.drop_non_english = s.flag("drop_non_english", true);
  lc.drop_multi_turn = s.flag("drop_multi_turn", true);
  if (s.has("tie_sentinels")) {
    const Json& t = s.raw("tie_sentinels");
    if (!t.is_array()) fail(s.where("tie_sentinels") + " must be an array of strings");
    lc.tie_sentinels.clear();
    for (const auto& v : t) {
      if (!v.is_string()) fail(s.where("tie_sentinels") + " must be an array of strings");
      lc.tie_sentinels.push_back(v.get<std::string>());
    }
  }
  s.finish();
  return lc;
}

BackendConfig parse_backend(const std::string& name, const Json& j, const std::string& base) {
  Section s(j, "backends." + name, base);
  BackendConfig b;
  b.name = name;
  b.type = s.str("type");
  b.audit_log = s.path("audit_log");
  if (b.type == "mock") {
    b.script = s.path("script");
    if (b.script.empty()) fail(s.where("script") + " is required for mock backends");
    b.strict = s.flag("strict", true);
    b.fallback_reply = s.str("fallback_reply");
  } else if (b.type == "http") {
    b.http.endpoint_url = s.str("endpoint_url");
    b.http.model_name = s.str("model");
    b.http.api_key_env = s.str("api_key_env");
    b.http.timeout_s = s.real("timeout_s", 60.0, 0.001);
    if (b.http.endpoint_url.empty()) fail(s.where("endpoint_url") + " is required for http backends");
    if (b.http.model_name.empty()) fail(s.where("model") + " is required for http backends");
  } else {
    fail(s.where("type") + " must be \"mock\" or \"http\"");
  }
  s.finish();
  return b;
}

sandbox::Limits parse_limits(Section& parent, const sandbox::Limits& def, const std::string& base) {
  if (!parent.has("limits")) return def;
  Section s(parent.raw("limits"), parent.where("limits"), base);
  sandbox::Limits l;
  l.wall_ms = s.integer("wall_ms", def.wall_ms, 1);
  l.memory_mb = s.integer("memory_mb", def.memory_mb, 1);
  l.output_kb = s.integer("output_kb", def.output_kb, 1);
  s.finish();
  return l;
}

}  // namespace

AppConfig parse_config(const Json& j, const std::string& base_dir) {
  AppConfig c;
  c.base_dir = base_dir;
  Section root(j, "config", base_dir);

  if (root.has("backends")) {
    const Json& b = root.raw("backends");
    if (!b.is_object()) fail("backends must be an object");
    for (const auto& [name, spec] : b.items()) c.backends[name] = parse_backend(name, spec, base_dir);
  }

  if (root.has("retry")) {
    Section s(root.raw("retry"), "retry", base_dir);
    c.retry.budget = static_cast<int>(s.integer("budget", 3, 0));
    c.retry.base_delay_ms = s.integer("base_delay_ms", 500, 0);
    c.retry.jitter = s.real("jitter", 0.5, 0.0);
    c.retry.max_in_flight = static_cast<int>(s.integer("max_in_flight", 8, 1));
    s.finish();
  }

  if (root.has("sandbox")) {
    Section s(root.raw("sandbox"), "sandbox", base_dir);
    if (s.has("runner")) {
      const Json& r = s.raw("runner");
      if (r.is_string() && r.get<std::string>() == "stub") {
        c.sandbox.runner.clear();
      } else if (r.is_array() && !r.empty()) {
        for (const auto& a : r) {
          if (!a.is_string()) fail("sandbox.runner must be \"stub\" or an array of strings");
          c.sandbox.runner.push_back(a.get<std::string>());
        }
      } else {
        fail("sandbox.runner must be \"stub\" or a non-empty array of strings");
      }
    }
    c.sandbox.dialect = s.str("dialect", "python");
    if (c.sandbox.dialect.empty()) fail("sandbox.dialect must be non-empty");
    c.sandbox.slack_ms = s.integer("slack_ms", 1000, 0);
    c.sandbox.limits = parse_limits(s, {}, base_dir);
    s.finish();
  }

  if (root.has("corpus")) {
    Section s(root.raw("corpus"), "corpus", base_dir);
    CorpusConfig cc;
    cc.input = s.path("input");
    cc.out = s.path("out");
    cc.stats = s.path("stats");
    cc.scripts = s.path("scripts");
    cc.rejections = s.path("rejections");
    cc.backend = s.str("backend");
    cc.seed = s.seed("seed");
    cc.workers = static_cast<int>(s.integer("workers", 4, 1));
    cc.code_samples = s.flag("code_samples", true);
    cc.shuffle = s.flag("shuffle", false);
    cc.question_retry_budget = static_cast<int>(s.integer("question_retry_budget", 1, 0));
    cc.retry_budget = static_cast<int>(s.integer("retry_budget", 2, 0));
    if (s.has("weights")) {
      const Json& w = s.raw("weights");
      if (!w.is_object()) fail("corpus.weights must be an object");
      cc.weights.clear();
      for (Category cat : kAllCategories) cc.weights[cat] = 0.0;
      double sum = 0;
      for (const auto& [name, v] : w.items()) {
        auto cat = parse_category(name);
        if (!cat) fail("corpus.weights: unknown category " + name);
        if (!v.is_number() || v.get<double>() < 0) fail("corpus.weights." + name + " must be a non-negative number");
        cc.weights[*cat] = v.get<double>();
        sum += v.get<double>();
      }
      if (sum <= 0) fail("corpus.weights must not all be zero");
    }
    cc.load = parse_load(s, "load", base_dir);
    s.finish();
    c.corpus = cc;
  }

  if (root.has("judge")) {
    Section s(root.raw("judge"), "judge", base_dir);
    JudgeConfig jc;
    jc.input = s.path("input");
    jc.out = s.path("out");
    jc.manifest = s.path("manifest");
    jc.analyzer = s.str("analyzer");
    jc.refiner = s.str("refiner");
    std::string mode = s.str("mode", "full");
    auto m = judge::parse_mode(mode);
    if (!m) fail("judge.mode must be one of full, no-refine, no-ft, no-ft-no-mf");
    jc.mode = *m;
    jc.rounds = static_cast<int>(s.integer("rounds", 1, 1));
    if (s.has("question_temperature")) jc.question_temperature = s.real("question_temperature", 0.0, 0.0);
    jc.seed = s.seed("seed");
    jc.questions_per_round = static_cast<int>(s.integer("questions_per_round", 3, 1));
    jc.retry_budget = static_cast<int>(s.integer("retry_budget", 2, 0));
    jc.workers = static_cast<int>(s.integer("workers", 4, 1));
    jc.load = parse_load(s, "load", base_dir);
    s.finish();
    c.judge = jc;
  }

  if (root.has("bench")) {
    Section s(root.raw("bench"), "bench", base_dir);
    BenchConfig bc;
    auto resolve = [&](const std::string& p) {
      return fs::path(p).is_absolute() ? p : (fs::path(base_dir) / p).lexically_normal().string();
    };
    if (s.has("subsets")) {
      const Json& sub = s.raw("subsets");
      if (sub.is_array()) {
        for (const auto& e : sub) {
          if (!e.is_object() || !e.contains("name") || !e.contains("dir") || !e["name"].is_string() ||
              !e["dir"].is_string()) {
            fail("bench.subsets entries need string \"name\" and \"dir\"");
          }
          bc.subsets.emplace_back(e["name"].get<std::string>(), resolve(e["dir"].get<std::string>()));
        }
      } else if (sub.is_object()) {
        for (const auto& [name, dir] : sub.items()) {
          if (!dir.is_string()) fail("bench.subsets." + name + " must be a directory path");
          bc.subsets.emplace_back(name, resolve(dir.get<std::string>()));
        }
      } else {
        fail("bench.subsets must be an array or an object");
      }
    }
    bc.out_dir = s.path("out");
    bc.consistency = s.path("consistency");
    s.finish();
    c.bench = bc;
  }

  if (root.has("verify")) {
    Section s(root.raw("verify"), "verify", base_dir);
    VerifyConfig vc;
    vc.responses = s.path("responses");
    vc.constraints = s.path("constraints");
    vc.out = s.path("out");
    s.finish();
    c.verify = vc;
  }

  root.finish();
  return c;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "config: cannot read " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kConfig, "config: " + path + " is not valid JSON: " + e.what());
  }
  std::string base = fs::absolute(fs::path(path)).parent_path().string();
  return parse_config(j, base);
}

void apply_overrides(AppConfig& config, Command command, const Overrides& o) {
  auto need = [&](bool present, const char* section) {
    if (!present) fail(std::string("missing \"") + section + "\" section for " + std::string(to_string(command)));
  };
  auto resolve = [](const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); };
  switch (command) {
    case Command::kBuildCorpus:
      need(config.corpus.has_value(), "corpus");
      if (o.out) config.corpus->out = resolve(*o.out);
      if (o.seed) config.corpus->seed = *o.seed;
      break;
    case Command::kJudge:
      need(config.judge.has_value(), "judge");
      if (o.out) config.judge->out = resolve(*o.out);
      if (o.seed) config.judge->seed = *o.seed;
      if (o.mode) config.judge->mode = *o.mode;
      if (o.rounds) {
        if (*o.rounds < 1) fail("--rounds must be at least 1");
        config.judge->rounds = *o.rounds;
      }
      break;
    case Command::kBench:
      need(config.bench.has_value(), "bench");
      if (o.out) config.bench->out_dir = resolve(*o.out);
      break;
    case Command::kVerify:
      need(config.verify.has_value(), "verify");
      if (o.out) config.verify->out = resolve(*o.out);
      break;
  }
}

namespace {

void need_backend(const AppConfig& c, const std::string& name, const std::string& where) {
  if (name.empty()) fail(where + " must name a backend");
  auto it = c.backends.find(name);
  if (it == c.backends.end()) fail(where + " names unknown backend \"" + name + "\"");
  if (it->second.type == "mock" && !fs::is_regular_file(it->second.script)) {
    fail("backends." + name + ".script not found: " + it->second.script);
  }
}

void need_input(const std::string& path, const std::string& where) {
  if (path.empty()) fail(where + " is required");
  if (!fs::is_regular_file(path)) throw Error(ErrorKind::kIo, where + " not found: " + path);
}

void need_output(const std::string& path, const std::string& where) {
  if (path.empty()) fail(where + " is required");
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error(ErrorKind::kIo, where + ": directory does not exist: " + parent.string());
  }
}

}  // namespace

void validate_for(const AppConfig& c, Command command) {
  switch (command) {
    case Command::kBuildCorpus: {
      if (!c.corpus) fail("missing \"corpus\" section");
      const auto& cc = *c.corpus;
      need_backend(c, cc.backend, "corpus.backend");
      if (!cc.seed) fail("corpus.seed must be set explicitly");
      need_input(cc.input, "corpus.input");
      need_output(cc.out, "corpus.out");
      break;
    }
    case Command::kJudge: {
      if (!c.judge) fail("missing \"judge\" section");
      const auto& jc = *c.judge;
      need_backend(c, jc.analyzer, "judge.analyzer");
      if (!jc.refiner.empty()) need_backend(c, jc.refiner, "judge.refiner");
      if (!jc.seed) fail("judge.seed must be set explicitly");
      need_input(jc.input, "judge.input");
      need_output(jc.out, "judge.out");
      break;
    }
    case Command::kBench: {
      if (!c.bench) fail("missing \"bench\" section");
      const auto& bc = *c.bench;
      if (bc.subsets.empty()) fail("bench.subsets must name at least one subset");
      std::set<std::string> names;
      for (const auto& [name, dir] : bc.subsets) {
        if (!names.insert(name).second) fail("bench.subsets: duplicate subset " + name);
        if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, "records directory for subset " + name + " not found: " + dir);
      }
      if (bc.out_dir.empty()) fail("bench.out is required");
      if (!bc.consistency.empty()) need_input(bc.consistency, "bench.consistency");
      break;
    }
    case Command::kVerify: {
      if (!c.verify) fail("missing \"verify\" section");
      need_input(c.verify->responses, "verify.responses");
      need_input(c.verify->constraints, "verify.constraints");
      need_output(c.verify->out, "verify.out");
      break;
    }
  }
}

std::shared_ptr<gateway::Backend> make_backend(const BackendConfig& b) {
  if (b.type == "mock") {
    auto script = gateway::MockScript::load(b.script, b.strict);
    script.fallback_reply = b.fallback_reply;
    return std::make_shared<gateway::MockBackend>(std::move(script), b.name);
  }
  if (b.type == "http") return std::make_shared<gateway::HttpBackend>(b.http);
  fail("backends." + b.name + ".type is not supported: " + b.type);
}

std::shared_ptr<gateway::Gateway> make_gateway(const AppConfig& c, const std::string& name) {
  auto it = c.backends.find(name);
  if (it == c.backends.end()) fail("unknown backend \"" + name + "\"");
  gateway::GatewayOptions opts;
  opts.retry.budget = c.retry.budget;
  opts.retry.base_delay = std::chrono::milliseconds(c.retry.base_delay_ms);
  opts.retry.jitter = c.retry.jitter;
  opts.max_in_flight = c.retry.max_in_flight;
  opts.audit_log_path = it->second.audit_log;
  return std::make_shared<gateway::Gateway>(make_backend(it->second), opts);
}

std::unique_ptr<sandbox::Sandbox> make_sandbox(const SandboxConfig& s) {
  if (s.runner.empty()) return std::make_unique<sandbox::StubSandbox>(s.dialect);
  return std::make_unique<sandbox::SubprocessSandbox>(s.runner, s.dialect, s.slack_ms);
}

}  // namespace pj::config
