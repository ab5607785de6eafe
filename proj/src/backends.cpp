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

#include "qpvote/backends.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace qpv::backends {

std::string_view to_string(TransportErrorKind kind) {
  switch (kind) {
    case TransportErrorKind::kUnknownVariant: return "UnknownVariant";
    case TransportErrorKind::kTimeout: return "Timeout";
    case TransportErrorKind::kTransportFailure: return "TransportFailure";
    case TransportErrorKind::kHttpStatus: return "HttpStatus";
    case TransportErrorKind::kCancelled: return "Cancelled";
  }
  return "TransportFailure";
}

void BackendRegistry::add(const PrecisionSpec& variant, std::shared_ptr<Backend> backend) {
  if (!backend) throw Error(ErrorCode::kInvalidArgument, "null backend for " + to_string(variant));
  if (!backends_.emplace(variant, std::move(backend)).second) {
    throw Error(ErrorCode::kDuplicateVariant, "variant " + to_string(variant) + " registered twice");
  }
}

std::vector<PrecisionSpec> BackendRegistry::variants() const {
  std::vector<PrecisionSpec> out;
  out.reserve(backends_.size());
  for (const auto& [spec, _] : backends_) out.push_back(spec);
  return out;
}

GenerationResult BackendRegistry::generate(const PrecisionSpec& variant,
                                           const GenerationRequest& req) const {
  const auto it = backends_.find(variant);
  if (it == backends_.end()) {
    return GenerationResult{variant, {}, std::chrono::milliseconds{0},
                            TransportError{TransportErrorKind::kUnknownVariant, 0,
                                           "variant " + to_string(variant) + " is not registered"}};
  }
  try {
    return it->second->generate(variant, req);
  } catch (const std::exception& e) {
    return GenerationResult{variant, {}, std::chrono::milliseconds{0},
                            TransportError{TransportErrorKind::kTransportFailure, 0, e.what()}};
  }
}

void parallel_for_bounded(std::size_t n, std::size_t limit,
                          const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (limit == 0) limit = 1;
  const std::size_t workers = std::min(limit, n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  threads.clear();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<GenerationResult> generate_ensemble(const BackendRegistry& registry,
                                                const std::vector<PrecisionSpec>& variants,
                                                const GenerationRequest& req,
                                                const FanOutOptions& options) {
  if (variants.empty()) throw Error(ErrorCode::kInvalidArgument, "generate_ensemble needs a variant");

  std::vector<std::optional<GenerationResult>> slots(variants.size());
  parallel_for_bounded(variants.size(), options.concurrency_limit, [&](std::size_t i) {
    if (options.stop.stop_requested()) {
      slots[i] = GenerationResult{variants[i], {}, std::chrono::milliseconds{0},
                                  TransportError{TransportErrorKind::kCancelled, 0, "cancelled"}};
      return;
    }
    slots[i] = registry.generate(variants[i], req);
  });

  std::vector<GenerationResult> out;
  out.reserve(variants.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace qpv::backends
