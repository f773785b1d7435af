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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dataprep/errors.hpp"
#include "dataprep/serving.hpp"

namespace dataprep {

HttpBackend::HttpBackend(std::string endpoint, std::string model,
                         std::optional<std::string> bearer_token, Duration timeout)
    : model_(std::move(model)), bearer_token_(std::move(bearer_token)), timeout_(timeout) {
  while (!endpoint.empty() && endpoint.back() == '/') endpoint.pop_back();
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error(Errc::kInvalidConfig, "serving: endpoint must include a scheme: " + endpoint);
  }
  const auto path = endpoint.find('/', scheme + 3);
  scheme_host_port_ = endpoint.substr(0, path);
  path_prefix_ = path == std::string::npos ? "" : endpoint.substr(path);
}

Json HttpBackend::request_body(const GenerationRequest& request, const std::string& model) {
  Json messages = Json::array();
  if (request.system_prompt) {
    messages.push_back({{"role", "system"}, {"content", *request.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_input}});
  return Json{{"model", model},
              {"messages", messages},
              {"temperature", request.sampling.temperature},
              {"top_p", request.sampling.top_p},
              {"max_tokens", request.sampling.max_tokens}};
}

BackendReply HttpBackend::complete(const GenerationRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(timeout_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (bearer_token_) headers.emplace("Authorization", "Bearer " + *bearer_token_);

  const std::string body = request_body(request, model_).dump();
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    return {BackendReply::Outcome::kRetryable, "",
            "http transport error: " + httplib::to_string(res.error())};
  }
  const int status = res->status;
  if (status == 429 || status >= 500) {
    return {BackendReply::Outcome::kRetryable, "", "http status " + std::to_string(status)};
  }
  if (status < 200 || status >= 300) {
    return {BackendReply::Outcome::kTerminal, "", "http status " + std::to_string(status)};
  }
  Json reply = Json::parse(res->body, nullptr, false);
  try {
    if (reply.is_discarded()) throw std::runtime_error("body is not JSON");
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    return {BackendReply::Outcome::kOk, content.get<std::string>(), ""};
  } catch (const std::exception& e) {
    return {BackendReply::Outcome::kRetryable, "",
            std::string("malformed completion payload: ") + e.what()};
  }
}

}  // namespace dataprep
