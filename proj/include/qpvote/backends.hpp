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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "qpvote/core.hpp"

namespace qpv::backends {

struct GenerationRequest {
  std::string instance_id;
  std::string prompt;
  DecodingParams params;
};

enum class TransportErrorKind { kUnknownVariant, kTimeout, kTransportFailure, kHttpStatus, kCancelled };

std::string_view to_string(TransportErrorKind kind);

struct TransportError {
  TransportErrorKind kind = TransportErrorKind::kTransportFailure;
  int http_status = 0;  // set for kHttpStatus
  std::string message;
};

struct GenerationResult {
  PrecisionSpec source;
  std::string text;
  std::chrono::milliseconds latency{0};
  std::optional<TransportError> transport_error;

  bool ok() const noexcept { return !transport_error.has_value(); }
};

// A generation endpoint for one or more precision variants. Implementations
// must be safe to call concurrently and must report failures through
// GenerationResult::transport_error rather than by throwing.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResult generate(const PrecisionSpec& variant, const GenerationRequest& req) = 0;
};

// Maps each precision variant to the backend that serves it. Populate before
// fanning out; lookups afterwards are read-only.
class BackendRegistry {
 public:
  void add(const PrecisionSpec& variant, std::shared_ptr<Backend> backend);
  bool contains(const PrecisionSpec& variant) const { return backends_.count(variant) != 0; }
  std::vector<PrecisionSpec> variants() const;

  // Unknown variants and exceptions escaping a backend become transport errors.
  GenerationResult generate(const PrecisionSpec& variant, const GenerationRequest& req) const;

 private:
  std::map<PrecisionSpec, std::shared_ptr<Backend>> backends_;
};

struct FanOutOptions {
  std::size_t concurrency_limit = 4;
  std::stop_token stop;  // a stop request cancels variants not yet started
};

// One result per variant in input order. At most `concurrency_limit` requests
// are in flight at once; a failing variant never aborts the others.
std::vector<GenerationResult> generate_ensemble(const BackendRegistry& registry,
                                                const std::vector<PrecisionSpec>& variants,
                                                const GenerationRequest& req,
                                                const FanOutOptions& options = {});

// Runs fn(i) for i in [0, n) on at most `limit` threads (the calling thread is one of them).
void parallel_for_bounded(std::size_t n, std::size_t limit, const std::function<void(std::size_t)>& fn);

}  // namespace qpv::backends
