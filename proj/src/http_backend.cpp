// Copyright 2026 The qpvote Authors
// SPDX-License-Identifier: Apache-2.0
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

#include "qpvote/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace qpv::backends {

using json = nlohmann::json;

std::chrono::milliseconds timeout_from_env(std::chrono::milliseconds fallback) {
  const char* raw = std::getenv("QP_HTTP_TIMEOUT_SECS");
  if (raw == nullptr || *raw == '\0') return fallback;
  char* end = nullptr;
  const double secs = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(secs > 0.0)) return fallback;
  return std::chrono::milliseconds(static_cast<long long>(secs * 1000.0));
}

HttpBackend::HttpBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  const std::string& url = endpoint_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::kConfigError, "base_url must start with http://, got \"" + url + "\"");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (endpoint_.max_retries < 0) endpoint_.max_retries = 0;
}

std::string build_chat_request(const std::string& model, const GenerationRequest& req) {
  json body = {
      {"model", model},
      {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
      {"temperature", req.params.temperature},
      {"max_tokens", req.params.max_tokens},
      {"stop", req.params.stop_sequences},
  };
  return body.dump();
}

std::optional<std::string> parse_chat_response(const std::string& body) {
  const json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const json& first = (*choices)[0];
  if (!first.is_object()) return std::nullopt;
  const auto message = first.find("message");
  if (message == first.end() || !message->is_object()) return std::nullopt;
  const auto content = message->find("content");
  if (content == message->end()) return std::nullopt;
  if (content->is_null()) return std::string{};
  if (!content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

GenerationResult HttpBackend::generate(const PrecisionSpec& variant, const GenerationRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  GenerationResult result{variant, {}, std::chrono::milliseconds{0}, std::nullopt};

  httplib::Client client(scheme_host_port_);
  const auto t = endpoint_.timeout;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(t);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(t - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  if (endpoint_.bearer_token) client.set_bearer_token_auth(*endpoint_.bearer_token);

  const std::string path = path_prefix_ + "/v1/chat/completions";
  const std::string body = build_chat_request(endpoint_.model, req);

  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read &&
                              std::chrono::steady_clock::now() - start >= t);
      result.transport_error =
          TransportError{timed_out ? TransportErrorKind::kTimeout : TransportErrorKind::kTransportFailure,
                         0, httplib::to_string(err)};
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      result.transport_error = TransportError{TransportErrorKind::kHttpStatus, res->status,
                                              "HTTP " + std::to_string(res->status)};
      if (res->status >= 400 && res->status < 500) break;
      continue;
    }
    if (auto content = parse_chat_response(res->body)) {
      result.text = std::move(*content);
      result.transport_error.reset();
    } else {
      result.transport_error = TransportError{TransportErrorKind::kTransportFailure, res->status,
                                              "malformed chat-completions response"};
    }
    break;
  }
  result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return result;
}

}  // namespace qpv::backends
