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


#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "pairjudge/error.hpp"
#include "pairjudge/gateway.hpp"

namespace pj::gateway {
namespace {

ChatRequest request(std::string text, Purpose purpose = Purpose::kQuestionGen) {
  ChatRequest r;
  r.purpose = purpose;
  r.messages = {{Role::kSystem, "sys"}, {Role::kUser, std::move(text)}};
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TEST(FingerprintTest, StableAndSensitiveToEveryField) {
  auto base = request("hello");
  auto fp = fingerprint(base);
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(fp, fingerprint(request("hello")));
  EXPECT_NE(fp, fingerprint(request("hello ")));
  EXPECT_NE(fp, fingerprint(request("hello", Purpose::kRefine)));
  auto t = base;
  t.params.temperature = 0.2;
  EXPECT_NE(fp, fingerprint(t));
  auto s = base;
  s.params.seed = 1;
  EXPECT_NE(fp, fingerprint(s));
  auto m = base;
  m.params.max_tokens = 7;
  EXPECT_EQ(fp, fingerprint(m));  // generation budget is not part of the key
  auto role = base;
  role.messages[0].role = Role::kAssistant;
  EXPECT_NE(fp, fingerprint(role));
  // Length prefixes keep message boundaries apart.
  ChatRequest a;
  a.messages = {{Role::kUser, "ab"}, {Role::kUser, "c"}};
  ChatRequest b;
  b.messages = {{Role::kUser, "a"}, {Role::kUser, "bc"}};
  EXPECT_NE(fingerprint(a), fingerprint(b));
}

TEST(FingerprintTest, JsonRoundTripKeepsFingerprint) {
  auto r = request("x\ny", Purpose::kConsistencyCheck);
  r.params.seed = 3;
  r.params.temperature = 0.25;
  EXPECT_EQ(fingerprint(chat_request_from_json(to_json(r))), fingerprint(r));
}

TEST(MockBackendTest, PlaysBackRecordedReplies) {
  MockScript script;
  script.add(request("q1"), "r1");
  MockBackend mock(script);
  EXPECT_EQ(mock.generate(request("q1")), "r1");
  try {
    mock.generate(request("q2"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPlayback);
  }
  script.strict = false;
  script.fallback_reply = "fallback";
  EXPECT_EQ(MockBackend(script).generate(request("q2")), "fallback");
}

TEST(MockBackendTest, SaveLoadAndDuplicates) {
  MockScript script;
  script.add(request("a"), "one");
  script.add(request("b"), "two\nlines");
  auto path = temp_path("pj_mock_script.jsonl");
  script.save(path);
  auto back = MockScript::load(path);
  EXPECT_EQ(back.entries, script.entries);
  std::ofstream(path, std::ios::app) << Json{{"fingerprint", fingerprint(request("a"))}, {"reply", "x"}}.dump() << "\n";
  try {
    MockScript::load(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  std::ofstream(path) << "{broken\n";
  EXPECT_THROW(MockScript::load(path), Error);
  std::filesystem::remove(path);
  try {
    MockScript::load(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(RecordingBackendTest, RecordsWhatItForwards) {
  auto inner = std::make_shared<CallbackBackend>([](const ChatRequest& r) { return "echo:" + r.messages[1].text; },
                                                 "echo");
  RecordingBackend rec(inner);
  EXPECT_EQ(rec.generate(request("z")), "echo:z");
  EXPECT_EQ(rec.identity(), "callback:echo");
  MockBackend replay(rec.script());
  EXPECT_EQ(replay.generate(request("z")), "echo:z");
}

TEST(GatewayTest, RetriesTransientFailuresWithBackoff) {
  int calls = 0;
  auto flaky = std::make_shared<CallbackBackend>(
      [&](const ChatRequest&) -> std::string {
        if (++calls < 3) throw TransientError("503");
        return "ok";
      },
      "flaky");
  std::vector<std::chrono::milliseconds> sleeps;
  GatewayOptions opts;
  opts.retry = {3, std::chrono::milliseconds(100), 0.0};
  opts.sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  Gateway gw(flaky, opts);
  EXPECT_EQ(gw.complete(request("x")), "ok");
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_EQ(sleeps[0].count(), 100);
  EXPECT_EQ(sleeps[1].count(), 200);
  EXPECT_EQ(gw.calls(), 1u);
}

TEST(GatewayTest, JitterStaysWithinBounds) {
  auto down = std::make_shared<CallbackBackend>([](const ChatRequest&) -> std::string { throw TransientError("x"); },
                                                "down");
  std::vector<std::chrono::milliseconds> sleeps;
  GatewayOptions opts;
  opts.retry = {4, std::chrono::milliseconds(1000), 0.5};
  opts.sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  Gateway gw(down, opts);
  try {
    gw.complete(request("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTransport);
    EXPECT_NE(std::string(e.what()).find("5 attempts"), std::string::npos);
  }
  ASSERT_EQ(sleeps.size(), 4u);
  for (std::size_t i = 0; i < sleeps.size(); ++i) {
    const auto base = 1000 << i;
    EXPECT_GE(sleeps[i].count(), base);
    EXPECT_LT(sleeps[i].count(), base + base / 2);
  }
}

TEST(GatewayTest, PermanentErrorsAreNotRetried) {
  int calls = 0;
  auto bad = std::make_shared<CallbackBackend>(
      [&](const ChatRequest&) -> std::string {
        ++calls;
        throw Error(ErrorKind::kTransport, "HTTP 400");
      },
      "bad");
  GatewayOptions opts;
  opts.sleeper = [](std::chrono::milliseconds) {};
  Gateway gw(bad, opts);
  EXPECT_THROW(gw.complete(request("x")), Error);
  EXPECT_EQ(calls, 1);
}

TEST(GatewayTest, RequiresAUserMessage) {
  Gateway gw(std::make_shared<CallbackBackend>([](const ChatRequest&) { return std::string("x"); }, "c"));
  ChatRequest r;
  r.messages = {{Role::kSystem, "only system"}};
  EXPECT_THROW(gw.complete(r), Error);
  EXPECT_THROW(Gateway(nullptr), Error);
}

TEST(GatewayTest, CapsRequestsInFlight) {
  std::atomic<int> now{0};
  std::atomic<int> peak{0};
  auto slow = std::make_shared<CallbackBackend>(
      [&](const ChatRequest&) {
        int n = ++now;
        int p = peak.load();
        while (n > p && !peak.compare_exchange_weak(p, n)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --now;
        return std::string("done");
      },
      "slow");
  GatewayOptions opts;
  opts.max_in_flight = 2;
  Gateway gw(slow, opts);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { gw.complete(request("x")); });
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(gw.calls(), 8u);
}

TEST(GatewayTest, WritesAuditLog) {
  auto path = temp_path("pj_audit.jsonl");
  std::filesystem::remove(path);
  GatewayOptions opts;
  opts.audit_log_path = path;
  Gateway gw(std::make_shared<CallbackBackend>([](const ChatRequest&) { return std::string("two words"); }, "c"), opts);
  gw.complete(request("first"));
  gw.complete(request("second", Purpose::kRefine));
  std::ifstream in(path);
  std::vector<Json> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(Json::parse(l));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["fingerprint"], fingerprint(request("first")));
  EXPECT_EQ(lines[0]["reply_words"], 2);
  EXPECT_EQ(lines[0]["attempts"], 1);
  EXPECT_EQ(lines[1]["purpose"], "Refine");
  EXPECT_EQ(lines[1]["backend"], "callback:c");
  std::filesystem::remove(path);
}

TEST(TemplateTest, RendersSlotsAndNamesMissingOnes) {
  auto r = render_prompt(TemplateId::kExplain, {{"source", "def f(x):\n    return 1"}});
  EXPECT_EQ(r.purpose, Purpose::kExplain);
  ASSERT_EQ(r.messages.size(), 2u);
  EXPECT_NE(r.messages[1].text.find("def f(x):"), std::string::npos);
  EXPECT_EQ(r.messages[1].text.find("{{"), std::string::npos);
  try {
    render_prompt(TemplateId::kRefine, {{"instruction", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTemplate);
    std::string what = e.what();
    for (const char* slot : {"response_1", "response_2", "analyses"}) {
      EXPECT_NE(what.find(slot), std::string::npos) << what;
    }
  }
  auto slots = required_slots(TemplateId::kCodeGen);
  EXPECT_EQ(slots.size(), 4u);
  EXPECT_FALSE(templates_version().empty());
}

TEST(TemplateTest, SlotValuesAreNotReexpanded) {
  auto r = render_prompt(TemplateId::kExplain, {{"source", "print('{{source}}')"}});
  EXPECT_NE(r.messages[1].text.find("print('{{source}}')"), std::string::npos);
}

class HttpBackendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = Json::parse(req.body);
      last_auth_ = req.get_header_value("Authorization");
      if (status_ != 200) {
        res.status = status_;
        res.set_content("nope", "text/plain");
        return;
      }
      Json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  HttpConfig config() {
    return {"http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions", "test-model", "", 5.0};
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int status_ = 200;
  Json last_body_;
  std::string last_auth_;
};

TEST_F(HttpBackendTest, SendsChatCompletionRequest) {
  ::setenv("PJ_TEST_KEY", "secret", 1);
  auto cfg = config();
  cfg.api_key_env = "PJ_TEST_KEY";
  HttpBackend backend(cfg);
  auto r = request("ping");
  r.params.seed = 4;
  EXPECT_EQ(backend.generate(r), "pong");
  EXPECT_EQ(last_body_["model"], "test-model");
  EXPECT_EQ(last_body_["seed"], 4);
  EXPECT_EQ(last_body_["messages"][1]["content"], "ping");
  EXPECT_EQ(last_auth_, "Bearer secret");
}

TEST_F(HttpBackendTest, ClassifiesFailures) {
  HttpBackend backend(config());
  status_ = 503;
  EXPECT_THROW(backend.generate(request("x")), TransientError);
  status_ = 429;
  EXPECT_THROW(backend.generate(request("x")), TransientError);
  status_ = 400;
  try {
    backend.generate(request("x"));
    FAIL();
  } catch (const TransientError&) {
    FAIL() << "400 must not be retried";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTransport);
  }
}

TEST(HttpConfigTest, RejectsBadConfiguration) {
  EXPECT_THROW(HttpBackend({"localhost:80/x", "m", "", 1.0}), Error);
  EXPECT_THROW(HttpBackend({"ftp://h/x", "m", "", 1.0}), Error);
  EXPECT_THROW(HttpBackend({"http://h/x", "", "", 1.0}), Error);
  EXPECT_THROW(HttpBackend({"http://h/x", "m", "PJ_SURELY_UNSET_VARIABLE", 1.0}), Error);
}

TEST(HttpConfigTest, UnreachableEndpointIsTransient) {
  HttpBackend backend({"http://127.0.0.1:1/v1/chat/completions", "m", "", 1.0});
  EXPECT_THROW(backend.generate(request("x")), TransientError);
}

}  // namespace
}  // namespace pj::gateway
