// Copyright 2026 The dataprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "dataprep/digest.hpp"
#include "dataprep/json_schema.hpp"
#include "dataprep/serving.hpp"
#include "testing.hpp"

namespace dataprep {
namespace {

using namespace std::chrono_literals;

std::string mock_of(const std::string& system, const std::string& user) {
  return "MOCK(" + sha256_hex(system + std::string(1, '\0') + user).substr(0, 16) + ")";
}

// Records how many calls overlap; replies with the input reversed.
class ProbeBackend : public Backend {
 public:
  explicit ProbeBackend(int fail_first = 0) : fail_first_(fail_first) {}
  BackendReply complete(const GenerationRequest& request) override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(200us);
    --in_flight_;
    if (calls_++ < fail_first_) return {BackendReply::Outcome::kRetryable, "", "busy"};
    return {BackendReply::Outcome::kOk, std::string(request.user_input.rbegin(), request.user_input.rend()), ""};
  }
  int peak() const { return peak_.load(); }

 private:
  int fail_first_;
  std::atomic<int> calls_{0}, in_flight_{0}, peak_{0};
};

// Fails every request whose input starts with "bad".
class SelectiveBackend : public Backend {
 public:
  BackendReply complete(const GenerationRequest& request) override {
    if (request.user_input.rfind("bad", 0) == 0) return {BackendReply::Outcome::kRetryable, "", "nope"};
    return {BackendReply::Outcome::kOk, "fine", ""};
  }
};

BackendConfig virtual_config(int max_in_flight = 8) {
  BackendConfig c;
  c.max_in_flight = max_in_flight;
  return c;
}

TEST(Mock, UnscriptedOutputIsDigestOfInput) {
  ServingClient client(BackendConfig{});
  auto out = client.generate_from_input({"Q1", "Q2", "Q3"});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].text(), mock_of("", "Q1"));
  EXPECT_EQ(out[1].text(), mock_of("", "Q2"));
  EXPECT_EQ(out[2].text(), mock_of("", "Q3"));
  for (const auto& r : out) EXPECT_EQ(r.attempts, 1);
}

TEST(Mock, EmptyBatchMakesNoCalls) {
  ServingClient client(BackendConfig{});
  EXPECT_TRUE(client.generate_from_input(std::vector<std::string>{}).empty());
  EXPECT_EQ(client.backend_calls(), 0u);
}

TEST(Mock, EmptyUserInputIsRejected) {
  ServingClient client(BackendConfig{});
  EXPECT_ERRC(client.generate_from_input({"ok", ""}), Errc::kInvalidArgument);
}

TEST(Mock, SystemPromptChangesOutput) {
  ServingClient client(BackendConfig{});
  auto a = client.generate_from_input({"same"}, std::string("first"));
  auto b = client.generate_from_input({"same"}, std::string("second"));
  EXPECT_NE(a[0].text(), b[0].text());
  auto c = client.generate_from_input({"same"}, std::string("first"));
  EXPECT_EQ(a[0].text(), c[0].text());
}

TEST(Mock, ScriptedReplyAndFallthrough) {
  BackendConfig c;
  c.script.rules.push_back({MatchMode::kExact, "Q1", {"A1"}, false});
  c.script.rules.push_back({MatchMode::kPrefix, "SQL:", {"prefixed"}, false});
  c.script.rules.push_back({MatchMode::kContains, "boom", {}, true});
  ServingClient client(c);
  auto out = client.generate_from_input({"Q1", "SQL: x", "Q2", "a boom b"});
  EXPECT_EQ(out[0].text(), "A1");
  EXPECT_EQ(out[1].text(), "prefixed");
  EXPECT_EQ(out[2].text(), mock_of("", "Q2"));
  EXPECT_FALSE(out[3].ok());
}

TEST(Mock, LastSqlBlockSubstitution) {
  MockScript script;
  script.rules.push_back({MatchMode::kContains, "echo", {"```sql\n{{last_sql_block}}\n```"}, false});
  GenerationRequest r;
  r.user_input = "echo\n```sql\nSELECT 1\n```\n```sql\nSELECT 2\n```";
  EXPECT_EQ(mock_generate(r, script).text(), "```sql\nSELECT 2\n```");
}

TEST(Mock, ConfigFromJson) {
  auto c = backend_config_from_json(Json::parse(R"({
    "kind": "mock", "max_in_flight": 4,
    "script": [{"match": "Q1", "reply": "A1"}, {"match": "x", "mode": "contains", "replies": ["1", "2"]}]
  })"));
  EXPECT_EQ(c.kind, BackendKind::kMock);
  EXPECT_EQ(c.max_in_flight, 4);
  ASSERT_EQ(c.script.rules.size(), 2u);
  EXPECT_EQ(c.script.rules[1].mode, MatchMode::kContains);
  EXPECT_EQ(backend_config_from_json(to_json(c)).script.rules.size(), 2u);
}

TEST(Config, InvalidSettingsRejected) {
  BackendConfig c;
  c.max_in_flight = 0;
  EXPECT_ERRC(c.validate(), Errc::kInvalidConfig);
  BackendConfig h;
  h.kind = BackendKind::kHttp;
  EXPECT_ERRC(h.validate(), Errc::kInvalidConfig);
}

TEST(Config, MissingCredentialFailsBeforeAnyCall) {
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  c.endpoint = "http://127.0.0.1:9";
  c.credential_env_var = "DATAPREP_TEST_SURELY_UNSET_KEY";
  ServingClient client(c);
  EXPECT_ERRC(client.generate_from_input({"x"}), Errc::kMissingCredential);
  EXPECT_EQ(client.backend_calls(), 0u);
}

TEST(Structured, ConformingAndFencedReplies) {
  const Json schema = Json::parse(R"({"type":"object","properties":{"sql":{"type":"string"}},"required":["sql"]})");
  EXPECT_EQ(validate_structured_output(R"({"sql":"SELECT 1"})", schema)["sql"], "SELECT 1");
  EXPECT_EQ(validate_structured_output("```json\n{\"sql\":\"x\"}\n```", schema)["sql"], "x");
}

TEST(Structured, WrongTypeReportsPathAndKeyword) {
  const Json schema = Json::parse(R"({"type":"object","properties":{"sql":{"type":"string"}},"required":["sql"]})");
  try {
    validate_structured_output(R"({"sql": 42})", schema);
    FAIL();
  } catch (const ConformanceError& e) {
    EXPECT_EQ(e.code(), Errc::kConformance);
    EXPECT_EQ(e.path(), ".sql");
    EXPECT_EQ(e.keyword(), "type");
  }
  EXPECT_ERRC(validate_structured_output("{not json", schema), Errc::kParse);
  try {
    validate_structured_output("{}", schema);
    FAIL();
  } catch (const ConformanceError& e) {
    EXPECT_EQ(e.keyword(), "required");
  }
}

TEST(Structured, ClientReturnsParsedObjectOrFails) {
  BackendConfig c;
  c.script.rules.push_back({MatchMode::kExact, "good", {R"({"aligned": true})"}, false});
  c.script.rules.push_back({MatchMode::kExact, "bad", {R"({"aligned": "yes"})"}, false});
  ServingClient client(c);
  const Json schema = Json::parse(R"({"type":"object","properties":{"aligned":{"type":"boolean"}},"required":["aligned"]})");
  auto out = client.generate_from_input({"good", "bad"}, std::nullopt, std::optional<Json>(schema));
  ASSERT_TRUE(out[0].ok());
  EXPECT_EQ((*out[0].output)["aligned"], true);
  EXPECT_FALSE(out[1].ok());
  EXPECT_EQ(out[1].attempts, 3);
}

TEST(Retry, BackoffSchedule) {
  RetryPolicy p;
  EXPECT_EQ(p.backoff_after(1), 500ms);
  EXPECT_EQ(p.backoff_after(2), 1000ms);
  EXPECT_EQ(p.backoff_after(3), 2000ms);
}

TEST(Retry, TransientFailuresRecover) {
  auto backend = std::make_shared<ProbeBackend>(2);
  auto clock = std::make_shared<VirtualClock>();
  ServingClient client(virtual_config(1), backend, clock);
  auto out = client.generate_from_input({"abc"});
  ASSERT_TRUE(out[0].ok());
  EXPECT_EQ(out[0].text(), "cba");
  EXPECT_EQ(out[0].attempts, 3);
  EXPECT_EQ(client.backend_calls(), 3u);
  EXPECT_EQ(clock->now(), Duration(1500ms));
}

TEST(Retry, ExhaustedFailureIsPerRequest) {
  ServingClient client(virtual_config(), std::make_shared<SelectiveBackend>(),
                       std::make_shared<VirtualClock>());
  auto out = client.generate_from_input({"ok1", "bad", "ok2"});
  EXPECT_TRUE(out[0].ok());
  EXPECT_FALSE(out[1].ok());
  EXPECT_EQ(out[1].attempts, 3);
  ASSERT_TRUE(out[1].error_detail);
  EXPECT_TRUE(out[2].ok());
  EXPECT_EQ(client.backend_calls(), 5u);
}

TEST(Retry, AbortOnFailureThrows) {
  auto c = virtual_config(1);
  c.abort_on_failure = true;
  ServingClient client(c, std::make_shared<SelectiveBackend>(), std::make_shared<VirtualClock>());
  EXPECT_ERRC(client.generate_from_input({"ok", "bad", "ok"}), Errc::kBatchAborted);
}

TEST(Concurrency, OrderKeptAndOverlapBounded) {
  std::vector<std::string> inputs;
  for (int i = 0; i < 100; ++i) inputs.push_back("in" + std::to_string(i));
  for (int limit : {1, 4, 16}) {
    auto backend = std::make_shared<ProbeBackend>();
    ServingClient client(virtual_config(limit), backend, std::make_shared<VirtualClock>());
    auto out = client.generate_from_input(inputs);
    ASSERT_EQ(out.size(), inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      EXPECT_EQ(out[i].text(), std::string(inputs[i].rbegin(), inputs[i].rend()));
    }
    EXPECT_LE(backend->peak(), limit);
    EXPECT_GE(backend->peak(), 1);
  }
}

TEST(RateLimit, ThroughputMatchesRateInVirtualTime) {
  auto clock = std::make_shared<VirtualClock>();
  auto c = virtual_config(4);
  c.rate_limit = 10.0;
  ServingClient client(c, std::make_shared<ProbeBackend>(), clock);
  std::vector<std::string> inputs(110, "x");
  client.generate_from_input(inputs);
  // The bucket starts full with 10 tokens; the other 100 arrive at 10/s.
  const double seconds = std::chrono::duration<double>(clock->now()).count();
  EXPECT_NEAR(seconds, 10.0, 1.0);
}

TEST(RateLimit, BucketCapacity) {
  TokenBucket b(2.5, std::make_shared<VirtualClock>());
  EXPECT_EQ(b.capacity(), 3.0);
}

TEST(Http, RequestBodyShape) {
  GenerationRequest r;
  r.user_input = "hi";
  r.system_prompt = "sys";
  r.sampling.temperature = 0.5;
  Json body = HttpBackend::request_body(r, "m1");
  EXPECT_EQ(body["model"], "m1");
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "hi");
  EXPECT_EQ(body["temperature"], 0.5);
}

TEST(Http, RetriesServerErrorsThenSucceeds) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 503;
      return;
    }
    auth = req.get_header_value("Authorization");
    Json reply = {{"choices", Json::array({{{"message", {{"role", "assistant"}, {"content", "pong"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("DATAPREP_TEST_HTTP_KEY", "secret", 1);
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  c.credential_env_var = "DATAPREP_TEST_HTTP_KEY";
  c.request_timeout = 5s;
  ServingClient client(c, nullptr, std::make_shared<VirtualClock>());
  auto out = client.generate_from_input({"ping"});
  server.stop();
  t.join();

  ASSERT_TRUE(out[0].ok()) << out[0].error_detail.value_or("");
  EXPECT_EQ(out[0].text(), "pong");
  EXPECT_EQ(out[0].attempts, 3);
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(Http, ClientErrorIsTerminal) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port);
  ServingClient client(c, nullptr, std::make_shared<VirtualClock>());
  auto out = client.generate_from_input({"ping"});
  server.stop();
  t.join();
  EXPECT_FALSE(out[0].ok());
  EXPECT_EQ(out[0].attempts, 1);
  EXPECT_EQ(hits.load(), 1);
}

}  // namespace
}  // namespace dataprep
