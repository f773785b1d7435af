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

#ifndef DATAPREP_SERVING_HPP_
#define DATAPREP_SERVING_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataprep/value.hpp"

namespace dataprep {

using Duration = std::chrono::nanoseconds;

/// Time source for retries and rate limiting. Tests use VirtualClock so that
/// backoff and throttling run without real sleeping.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Duration now() const = 0;
  virtual void sleep_until(Duration when) = 0;
};

class SystemClock final : public Clock {
 public:
  Duration now() const override;
  void sleep_until(Duration when) override;
};

/// Sleeping advances the shared virtual time to the wake-up instant.
class VirtualClock final : public Clock {
 public:
  Duration now() const override { return Duration(now_.load()); }
  void sleep_until(Duration when) override;
  void advance(Duration by) { now_.fetch_add(by.count()); }

 private:
  std::atomic<std::int64_t> now_{0};
};

std::shared_ptr<Clock> system_clock();

struct SamplingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;
};

struct GenerationRequest {
  std::string user_input;
  std::optional<std::string> system_prompt;
  /// JSON-schema document; conforming replies are returned parsed.
  std::optional<Json> schema_constraint;
  SamplingParams sampling;
  /// Optional acceptance check on the raw reply text. A rejected reply is
  /// retried like a transport failure.
  std::function<bool(std::string_view)> accept;
};

enum class ResponseStatus { kOk, kFailed };

struct GenerationResponse {
  /// Text reply as a JSON string, or the parsed object when schema-constrained.
  std::optional<Json> output;
  ResponseStatus status = ResponseStatus::kFailed;
  int attempts = 0;
  std::optional<std::string> error_detail;

  bool ok() const { return status == ResponseStatus::kOk; }
  /// The reply text; for parsed objects, their JSON serialisation.
  std::string text() const;
};

enum class BackendKind { kMock, kHttp };

struct RetryPolicy {
  int max_attempts = 3;
  Duration base_backoff = std::chrono::milliseconds(500);
  double backoff_multiplier = 2.0;

  /// Sleep before attempt `attempt + 1`: base * multiplier^(attempt - 1).
  Duration backoff_after(int attempt) const;
};

enum class MatchMode { kExact, kPrefix, kContains };

/// One scripted mock reply. With several replies, the one used is picked by
/// the request digest, so the choice is still a pure function of the input.
/// A reply may contain `{{last_sql_block}}`, replaced by the body of the last
/// ```sql fenced block in the user input.
struct MockRule {
  MatchMode mode = MatchMode::kExact;
  std::string pattern;
  std::vector<std::string> replies;
  bool fail = false;
};

struct MockScript {
  std::vector<MockRule> rules;
};

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::optional<std::string> endpoint;
  std::string model = "default";
  std::optional<std::string> credential_env_var;
  int max_in_flight = 8;
  RetryPolicy retry;
  std::optional<double> rate_limit;  // requests per second
  bool abort_on_failure = false;
  Duration request_timeout = std::chrono::seconds(60);
  MockScript script;

  /// Throws Error(kInvalidConfig) when the invariants do not hold.
  void validate() const;
};

BackendConfig backend_config_from_json(const Json& json);
Json to_json(const BackendConfig& config);

/// Result of a single backend call.
struct BackendReply {
  enum class Outcome { kOk, kRetryable, kTerminal };
  Outcome outcome = Outcome::kOk;
  std::string text;
  std::string error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply complete(const GenerationRequest& request) = 0;
};

/// Deterministic stand-in for a model. Unscripted output is
/// "MOCK(" + first 16 hex chars of SHA-256(system_prompt NUL user_input) + ")".
GenerationResponse mock_generate(const GenerationRequest& request,
                                 const MockScript& script = {});

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script = {}) : script_(std::move(script)) {}
  BackendReply complete(const GenerationRequest& request) override;

 private:
  MockScript script_;
};

/// OpenAI-style chat-completions over HTTP(S).
class HttpBackend final : public Backend {
 public:
  HttpBackend(std::string endpoint, std::string model,
              std::optional<std::string> bearer_token, Duration timeout);
  BackendReply complete(const GenerationRequest& request) override;

  static Json request_body(const GenerationRequest& request, const std::string& model);

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string model_;
  std::optional<std::string> bearer_token_;
  Duration timeout_;
};

/// Token bucket with capacity ceil(rate) that starts full. acquire() reserves
/// a token and sleeps on the clock until it is due.
class TokenBucket {
 public:
  TokenBucket(double rate_per_second, std::shared_ptr<Clock> clock);
  void acquire();
  double capacity() const { return capacity_; }

 private:
  double rate_;
  double capacity_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  double tokens_;
  Duration last_;
};

/// The single batch entry point used by every LLM-driven operator.
class ServingClient {
 public:
  /// `backend` overrides the one implied by `config.kind`.
  explicit ServingClient(BackendConfig config, std::shared_ptr<Backend> backend = nullptr,
                         std::shared_ptr<Clock> clock = nullptr);

  /// Responses are index-aligned with `requests`. At most max_in_flight
  /// calls are outstanding at once. Per-request failures come back as
  /// failed responses unless abort_on_failure is set, in which case the
  /// first failure throws Error(kBatchAborted).
  std::vector<GenerationResponse> generate_from_input(
      std::span<const GenerationRequest> requests) const;

  std::vector<GenerationResponse> generate_from_input(
      const std::vector<std::string>& user_inputs,
      const std::optional<std::string>& system_prompt = std::nullopt,
      const std::optional<Json>& json_schema = std::nullopt) const;

  const BackendConfig& config() const { return config_; }
  std::uint64_t backend_calls() const { return calls_.load(); }

 private:
  GenerationResponse serve_one(const GenerationRequest& request) const;

  BackendConfig config_;
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<TokenBucket> bucket_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace dataprep

#endif  // DATAPREP_SERVING_HPP_
