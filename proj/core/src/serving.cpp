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

#include "dataprep/serving.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "dataprep/digest.hpp"
#include "dataprep/errors.hpp"
#include "dataprep/json_schema.hpp"
#include "dataprep/text_util.hpp"

namespace dataprep {

Duration SystemClock::now() const {
  return std::chrono::duration_cast<Duration>(
      std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_until(Duration when) {
  const Duration delta = when - now();
  if (delta > Duration::zero()) std::this_thread::sleep_for(delta);
}

void VirtualClock::sleep_until(Duration when) {
  std::int64_t cur = now_.load();
  while (cur < when.count() && !now_.compare_exchange_weak(cur, when.count())) {
  }
}

std::shared_ptr<Clock> system_clock() {
  static auto clock = std::make_shared<SystemClock>();
  return clock;
}

std::string GenerationResponse::text() const {
  if (!output) return {};
  if (output->is_string()) return output->get<std::string>();
  return output->dump();
}

Duration RetryPolicy::backoff_after(int attempt) const {
  const double scale = std::pow(backoff_multiplier, std::max(0, attempt - 1));
  return Duration(static_cast<Duration::rep>(static_cast<double>(base_backoff.count()) * scale));
}

void BackendConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::kInvalidConfig, "serving: " + why); };
  if (kind == BackendKind::kHttp && (!endpoint || endpoint->empty())) {
    fail("http backend requires an endpoint");
  }
  if (max_in_flight < 1) fail("max_in_flight must be >= 1");
  if (retry.max_attempts < 1) fail("retry.max_attempts must be >= 1");
  if (retry.backoff_multiplier < 1.0) fail("retry.backoff_multiplier must be >= 1");
  if (retry.base_backoff < Duration::zero()) fail("retry.base_backoff must be >= 0");
  if (rate_limit && !(*rate_limit > 0.0)) fail("rate_limit must be positive");
}

namespace {

std::string_view to_string(MatchMode m) {
  switch (m) {
    case MatchMode::kExact: return "exact";
    case MatchMode::kPrefix: return "prefix";
    case MatchMode::kContains: return "contains";
  }
  return "exact";
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw Error(Errc::kInvalidConfig, std::string("serving: bad value for '") + key + "'");
  }
}

}  // namespace

BackendConfig backend_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::kInvalidConfig, "serving: expected an object");
  BackendConfig c;
  const auto kind = get_or<std::string>(j, "kind", "mock");
  if (kind == "mock") {
    c.kind = BackendKind::kMock;
  } else if (kind == "http") {
    c.kind = BackendKind::kHttp;
  } else {
    throw Error(Errc::kInvalidConfig, "serving: unknown backend kind '" + kind + "'");
  }
  if (j.contains("endpoint")) c.endpoint = get_or<std::string>(j, "endpoint", "");
  c.model = get_or<std::string>(j, "model", c.model);
  if (j.contains("credential_env_var")) {
    c.credential_env_var = get_or<std::string>(j, "credential_env_var", "");
  }
  c.max_in_flight = get_or<int>(j, "max_in_flight", c.max_in_flight);
  if (auto r = j.find("retry"); r != j.end() && r->is_object()) {
    c.retry.max_attempts = get_or<int>(*r, "max_attempts", c.retry.max_attempts);
    c.retry.base_backoff = std::chrono::milliseconds(get_or<std::int64_t>(
        *r, "base_backoff_ms",
        std::chrono::duration_cast<std::chrono::milliseconds>(c.retry.base_backoff).count()));
    c.retry.backoff_multiplier =
        get_or<double>(*r, "backoff_multiplier", c.retry.backoff_multiplier);
  }
  if (j.contains("rate_limit") && !j["rate_limit"].is_null()) {
    c.rate_limit = get_or<double>(j, "rate_limit", 0.0);
  }
  c.abort_on_failure = get_or<bool>(j, "abort_on_failure", false);
  c.request_timeout = std::chrono::milliseconds(get_or<std::int64_t>(j, "request_timeout_ms", 60000));
  if (auto s = j.find("script"); s != j.end()) {
    if (!s->is_array()) throw Error(Errc::kInvalidConfig, "serving: script must be an array");
    for (const auto& rj : *s) {
      MockRule rule;
      rule.pattern = get_or<std::string>(rj, "match", "");
      const auto mode = get_or<std::string>(rj, "mode", "exact");
      if (mode == "exact") {
        rule.mode = MatchMode::kExact;
      } else if (mode == "prefix") {
        rule.mode = MatchMode::kPrefix;
      } else if (mode == "contains") {
        rule.mode = MatchMode::kContains;
      } else {
        throw Error(Errc::kInvalidConfig, "serving: unknown script mode '" + mode + "'");
      }
      if (rj.contains("reply")) rule.replies.push_back(get_or<std::string>(rj, "reply", ""));
      if (rj.contains("replies")) {
        for (const auto& r : rj["replies"]) rule.replies.push_back(r.get<std::string>());
      }
      rule.fail = get_or<bool>(rj, "fail", false);
      c.script.rules.push_back(std::move(rule));
    }
  }
  c.validate();
  return c;
}

Json to_json(const BackendConfig& c) {
  Json j{{"kind", c.kind == BackendKind::kMock ? "mock" : "http"},
         {"model", c.model},
         {"max_in_flight", c.max_in_flight},
         {"retry",
          {{"max_attempts", c.retry.max_attempts},
           {"base_backoff_ms",
            std::chrono::duration_cast<std::chrono::milliseconds>(c.retry.base_backoff).count()},
           {"backoff_multiplier", c.retry.backoff_multiplier}}},
         {"abort_on_failure", c.abort_on_failure},
         {"request_timeout_ms",
          std::chrono::duration_cast<std::chrono::milliseconds>(c.request_timeout).count()}};
  if (c.endpoint) j["endpoint"] = *c.endpoint;
  if (c.credential_env_var) j["credential_env_var"] = *c.credential_env_var;
  if (c.rate_limit) j["rate_limit"] = *c.rate_limit;
  if (!c.script.rules.empty()) {
    Json rules = Json::array();
    for (const auto& r : c.script.rules) {
      rules.push_back({{"match", r.pattern},
                       {"mode", to_string(r.mode)},
                       {"replies", r.replies},
                       {"fail", r.fail}});
    }
    j["script"] = rules;
  }
  return j;
}

// --- Mock ----------------------------------------------------------------

namespace {

const MockRule* find_rule(const MockScript& script, const std::string& input) {
  for (MatchMode mode : {MatchMode::kExact, MatchMode::kPrefix, MatchMode::kContains}) {
    for (const auto& rule : script.rules) {
      if (rule.mode != mode) continue;
      const bool hit = mode == MatchMode::kExact    ? input == rule.pattern
                       : mode == MatchMode::kPrefix ? input.starts_with(rule.pattern)
                                                    : input.find(rule.pattern) != std::string::npos;
      if (hit) return &rule;
    }
  }
  return nullptr;
}

std::string substitute(std::string reply, const std::string& input) {
  static constexpr std::string_view kToken = "{{last_sql_block}}";
  auto pos = reply.find(kToken);
  if (pos == std::string::npos) return reply;
  std::string sql;
  for (const auto& block : fenced_blocks(input)) {
    if (block.tag == "sql") sql = block.body;
  }
  while (pos != std::string::npos) {
    reply.replace(pos, kToken.size(), sql);
    pos = reply.find(kToken, pos + sql.size());
  }
  return reply;
}

}  // namespace

GenerationResponse mock_generate(const GenerationRequest& request, const MockScript& script) {
  std::string keyed = request.system_prompt.value_or("");
  keyed.push_back('\0');
  keyed += request.user_input;
  const std::string digest = sha256_hex(keyed);

  GenerationResponse resp;
  resp.attempts = 1;
  const MockRule* rule = find_rule(script, request.user_input);
  if (rule == nullptr) {
    resp.status = ResponseStatus::kOk;
    resp.output = Json("MOCK(" + digest.substr(0, 16) + ")");
    return resp;
  }
  if (rule->fail) {
    resp.status = ResponseStatus::kFailed;
    resp.error_detail = "scripted failure";
    return resp;
  }
  std::string reply;
  if (!rule->replies.empty()) {
    const std::uint64_t pick = std::stoull(digest.substr(0, 16), nullptr, 16);
    reply = rule->replies[pick % rule->replies.size()];
  }
  resp.status = ResponseStatus::kOk;
  resp.output = Json(substitute(std::move(reply), request.user_input));
  return resp;
}

BackendReply MockBackend::complete(const GenerationRequest& request) {
  GenerationResponse r = mock_generate(request, script_);
  if (!r.ok()) return {BackendReply::Outcome::kTerminal, "", r.error_detail.value_or("failed")};
  return {BackendReply::Outcome::kOk, r.text(), ""};
}

// --- Token bucket ----------------------------------------------------------

TokenBucket::TokenBucket(double rate_per_second, std::shared_ptr<Clock> clock)
    : rate_(rate_per_second),
      capacity_(std::ceil(rate_per_second)),
      clock_(std::move(clock)),
      tokens_(capacity_),
      last_(clock_->now()) {}

void TokenBucket::acquire() {
  Duration wake;
  {
    std::lock_guard lock(mu_);
    const Duration now = clock_->now();
    if (now > last_) {
      const double elapsed = std::chrono::duration<double>(now - last_).count();
      tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
      last_ = now;
    }
    tokens_ -= 1.0;
    if (tokens_ >= 0.0) return;
    const double wait_s = -tokens_ / rate_;
    wake = last_ + std::chrono::duration_cast<Duration>(std::chrono::duration<double>(wait_s));
  }
  clock_->sleep_until(wake);
}

// --- Client ------------------------------------------------------------------

ServingClient::ServingClient(BackendConfig config, std::shared_ptr<Backend> backend,
                             std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      clock_(clock ? std::move(clock) : system_clock()) {
  config_.validate();
  if (!backend_) {
    if (config_.kind == BackendKind::kMock) {
      backend_ = std::make_shared<MockBackend>(config_.script);
    } else {
      std::optional<std::string> token;
      if (config_.credential_env_var) {
        if (const char* v = std::getenv(config_.credential_env_var->c_str())) token = v;
      }
      backend_ = std::make_shared<HttpBackend>(*config_.endpoint, config_.model, token,
                                               config_.request_timeout);
    }
  }
  if (config_.rate_limit) bucket_ = std::make_shared<TokenBucket>(*config_.rate_limit, clock_);
}

GenerationResponse ServingClient::serve_one(const GenerationRequest& request) const {
  GenerationResponse resp;
  std::string last_error = "no attempt made";
  const int max_attempts = config_.retry.max_attempts;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (bucket_) bucket_->acquire();
    calls_.fetch_add(1);
    BackendReply reply;
    try {
      reply = backend_->complete(request);
    } catch (const std::exception& e) {
      reply = {BackendReply::Outcome::kRetryable, "", e.what()};
    }
    resp.attempts = attempt;
    if (reply.outcome == BackendReply::Outcome::kOk) {
      try {
        Json output;
        if (request.schema_constraint) {
          output = validate_structured_output(reply.text, *request.schema_constraint);
        } else {
          output = Json(reply.text);
        }
        if (request.accept && !request.accept(reply.text)) {
          throw Error(Errc::kConformance, "reply rejected by acceptance check");
        }
        resp.status = ResponseStatus::kOk;
        resp.output = std::move(output);
        resp.error_detail.reset();
        return resp;
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    } else if (reply.outcome == BackendReply::Outcome::kTerminal) {
      resp.status = ResponseStatus::kFailed;
      resp.error_detail = reply.error.empty() ? "terminal failure" : reply.error;
      return resp;
    } else {
      last_error = reply.error.empty() ? "retryable failure" : reply.error;
    }
    if (attempt < max_attempts) {
      clock_->sleep_until(clock_->now() + config_.retry.backoff_after(attempt));
    }
  }
  resp.status = ResponseStatus::kFailed;
  resp.error_detail = last_error;
  return resp;
}

std::vector<GenerationResponse> ServingClient::generate_from_input(
    std::span<const GenerationRequest> requests) const {
  if (config_.kind == BackendKind::kHttp && config_.credential_env_var &&
      std::getenv(config_.credential_env_var->c_str()) == nullptr) {
    throw Error(Errc::kMissingCredential,
                "serving: credential variable '" + *config_.credential_env_var + "' is not set");
  }
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (requests[i].user_input.empty()) {
      throw Error(Errc::kInvalidArgument, "serving: request " + std::to_string(i) +
                                              " has an empty user_input");
    }
  }
  const std::size_t n = requests.size();
  std::vector<GenerationResponse> results(n);
  if (n == 0) return results;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::mutex abort_mu;
  std::optional<std::size_t> abort_index;

  auto work = [&] {
    while (!aborted.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      results[i] = serve_one(requests[i]);
      if (!results[i].ok() && config_.abort_on_failure) {
        std::lock_guard lock(abort_mu);
        if (!abort_index || i < *abort_index) abort_index = i;
        aborted.store(true);
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(config_.max_in_flight));
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (abort_index) {
    throw Error(Errc::kBatchAborted,
                "serving: request " + std::to_string(*abort_index) +
                    " failed: " + results[*abort_index].error_detail.value_or("unknown"));
  }
  return results;
}

std::vector<GenerationResponse> ServingClient::generate_from_input(
    const std::vector<std::string>& user_inputs, const std::optional<std::string>& system_prompt,
    const std::optional<Json>& json_schema) const {
  std::vector<GenerationRequest> requests;
  requests.reserve(user_inputs.size());
  for (const auto& in : user_inputs) {
    GenerationRequest r;
    r.user_input = in;
    r.system_prompt = system_prompt;
    r.schema_constraint = json_schema;
    requests.push_back(std::move(r));
  }
  return generate_from_input(std::span<const GenerationRequest>(requests));
}

}  // namespace dataprep
