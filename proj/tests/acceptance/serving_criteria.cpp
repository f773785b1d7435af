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

// Criterion 4: ordering, concurrency bound, retry accounting and rate limit.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "criteria.hpp"
#include "dataprep/serving.hpp"

namespace dataprep::acceptance {
namespace {

using namespace std::chrono_literals;

std::uint64_t mix(const std::string& s) { return std::hash<std::string>{}(s) * 0x9E3779B97F4A7C15ull; }

// Sleeps for a latency derived from the input and records peak overlap.
class LatencyBackend : public Backend {
 public:
  BackendReply complete(const GenerationRequest& r) override {
    const int now = ++active_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::microseconds(mix(r.user_input) % 400));
    --active_;
    return {BackendReply::Outcome::kOk, "reply:" + r.user_input, ""};
  }
  int peak() const { return peak_.load(); }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

// Request "f<n>" fails retryably n times, "t" fails terminally.
class FlakyBackend : public Backend {
 public:
  explicit FlakyBackend(std::size_t n) : calls_(n) {}
  BackendReply complete(const GenerationRequest& r) override {
    const auto sep = r.user_input.find(':');
    const std::size_t index = std::stoul(r.user_input.substr(0, sep));
    const std::string plan = r.user_input.substr(sep + 1);
    const int call = ++calls_[index];
    if (plan == "t") return {BackendReply::Outcome::kTerminal, "", "refused"};
    if (call <= std::stoi(plan.substr(1))) return {BackendReply::Outcome::kRetryable, "", "busy"};
    return {BackendReply::Outcome::kOk, "done", ""};
  }

 private:
  std::vector<std::atomic<int>> calls_;
};

std::string check_ordering(std::string& detail) {
  std::vector<std::string> inputs;
  for (int i = 0; i < 1000; ++i) inputs.push_back("request-" + std::to_string(i));
  std::vector<std::string> first;
  std::ostringstream os;
  for (int limit : {1, 8, 64}) {
    BackendConfig c;
    c.max_in_flight = limit;
    auto backend = std::make_shared<LatencyBackend>();
    ServingClient client(c, backend);
    auto out = client.generate_from_input(inputs);
    std::vector<std::string> texts;
    for (const auto& r : out) texts.push_back(r.ok() ? r.text() : "<failed>");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (texts[i] != "reply:" + inputs[i]) return "limit " + std::to_string(limit) + " misaligned at " + std::to_string(i);
    }
    if (first.empty()) first = texts;
    if (texts != first) return "limit " + std::to_string(limit) + " differs from limit 1";
    if (backend->peak() > limit) return "overlap " + std::to_string(backend->peak()) + " above " + std::to_string(limit);
    os << "peak " << backend->peak() << "/" << limit << " ";
  }
  detail += os.str();
  return "";
}

std::string check_retries(std::string& detail) {
  const RetryPolicy policy;
  std::mt19937_64 rng(4);
  std::vector<std::string> inputs;
  std::vector<int> expected_attempts;
  std::vector<bool> expected_ok;
  long long expected_calls = 0;
  std::chrono::nanoseconds expected_wait{0};
  for (int i = 0; i < 300; ++i) {
    std::string plan;
    int attempts;
    bool ok;
    if (rng() % 10 == 0) {
      plan = "t";
      attempts = 1;
      ok = false;
    } else {
      const int f = static_cast<int>(rng() % 5);
      plan = "f" + std::to_string(f);
      attempts = std::min(f + 1, policy.max_attempts);
      ok = f < policy.max_attempts;
    }
    // Backoff before every attempt after the first.
    for (int a = 1; a < attempts; ++a) {
      expected_wait += std::chrono::nanoseconds(
          static_cast<long long>(500e6 * std::pow(2.0, a - 1)));
    }
    inputs.push_back(std::to_string(i) + ":" + plan);
    expected_attempts.push_back(attempts);
    expected_ok.push_back(ok);
    expected_calls += attempts;
  }
  BackendConfig c;
  c.max_in_flight = 1;
  auto clock = std::make_shared<VirtualClock>();
  ServingClient client(c, std::make_shared<FlakyBackend>(inputs.size()), clock);
  auto out = client.generate_from_input(inputs);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].attempts != expected_attempts[i] || out[i].ok() != expected_ok[i]) {
      return "request " + inputs[i] + " took " + std::to_string(out[i].attempts) + " attempts, expected " +
             std::to_string(expected_attempts[i]);
    }
  }
  if (static_cast<long long>(client.backend_calls()) != expected_calls) return "backend call count differs";
  if (clock->now() != expected_wait) return "virtual backoff time differs";
  std::ostringstream os;
  os << "retries " << expected_calls << " calls over " << inputs.size() << " requests, "
     << std::chrono::duration<double>(expected_wait).count() << " s backoff; ";
  detail += os.str();
  return "";
}

// Records the virtual time at which each request was admitted.
class StampingBackend : public Backend {
 public:
  explicit StampingBackend(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {}
  BackendReply complete(const GenerationRequest&) override {
    std::lock_guard<std::mutex> lock(mu_);
    stamps_.push_back(clock_->now());
    return {BackendReply::Outcome::kOk, "ok", ""};
  }
  std::vector<Duration> stamps() const {
    std::lock_guard<std::mutex> lock(mu_);
    auto s = stamps_;
    std::sort(s.begin(), s.end());
    return s;
  }

 private:
  std::shared_ptr<Clock> clock_;
  mutable std::mutex mu_;
  std::vector<Duration> stamps_;
};

// The bucket admits a burst of ceil(rate) requests at once and then refills
// at the configured rate; the admitted rate is measured after that burst.
std::string check_rate(std::string& detail) {
  std::ostringstream os;
  os << "rate";
  for (double rate : {0.5, 5.0, 50.0, 400.0}) {
    BackendConfig c;
    c.rate_limit = rate;
    c.max_in_flight = 8;
    auto clock = std::make_shared<VirtualClock>();
    auto backend = std::make_shared<StampingBackend>(clock);
    ServingClient client(c, backend, clock);
    std::vector<std::string> inputs;
    for (int i = 0; i < 1000; ++i) inputs.push_back("r" + std::to_string(i));
    client.generate_from_input(inputs);
    const auto stamps = backend->stamps();
    const auto burst = static_cast<std::size_t>(std::ceil(rate));
    std::size_t at_start = 0;
    while (at_start < stamps.size() && stamps[at_start] == stamps.front()) ++at_start;
    if (at_start > burst) return "burst of " + std::to_string(at_start) + " exceeds capacity at rate " + std::to_string(rate);
    const double secs = std::chrono::duration<double>(stamps.back() - stamps.front()).count();
    const double admitted = secs > 0 ? (stamps.size() - at_start) / secs : INFINITY;
    if (std::abs(admitted - rate) > 0.1 * rate) {
      return "rate " + std::to_string(rate) + " admitted " + std::to_string(admitted);
    }
    os << " " << rate << "->" << admitted << " (burst " << at_start << ")";
  }
  detail += os.str();
  return "";
}

}  // namespace

Verdict serving_contract() {
  std::string detail;
  for (auto check : {check_ordering, check_retries, check_rate}) {
    auto problem = check(detail);
    if (!problem.empty()) return {false, detail + problem};
  }
  return {true, detail};
}

}  // namespace dataprep::acceptance
