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

#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "qpvote/backends.hpp"

namespace qpv::backends {

struct HttpEndpoint {
  std::string base_url;   // http://host:port[/prefix]
  std::string model;
  std::optional<std::string> bearer_token;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 2;    // transport failures and 5xx only; 4xx is final
};

// Reads QP_HTTP_TIMEOUT_SECS; returns `fallback` when unset or malformed.
std::chrono::milliseconds timeout_from_env(std::chrono::milliseconds fallback);

// Serves one variant from an OpenAI-style chat-completions server:
//   POST {base_url}/v1/chat/completions
//   {"model", "messages":[{"role":"user","content":prompt}], "temperature", "max_tokens", "stop"}
// and reads choices[0].message.content.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpEndpoint endpoint);

  GenerationResult generate(const PrecisionSpec& variant, const GenerationRequest& req) override;

  const HttpEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  HttpEndpoint endpoint_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

// Request body for a chat-completions call, exposed for tests.
std::string build_chat_request(const std::string& model, const GenerationRequest& req);

// Extracts choices[0].message.content; nullopt on any shape mismatch.
std::optional<std::string> parse_chat_response(const std::string& body);

}  // namespace qpv::backends
