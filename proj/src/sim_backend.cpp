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

#include "qpvote/sim_backend.hpp"

#include <cmath>
#include <limits>

#include "hash_util.hpp"
#include "qpvote/kernels.hpp"

namespace qpv::backends {

void ToyTaskTable::add(std::string instance_id, ToyItem item) {
  items_.insert_or_assign(std::move(instance_id), std::move(item));
}

const ToyItem* ToyTaskTable::find(const std::string& instance_id) const {
  const auto it = items_.find(instance_id);
  return it == items_.end() ? nullptr : &it->second;
}

SimBackend::SimBackend(SimBackendConfig config) : config_(std::move(config)) {
  if (!(config_.refusal_prob >= 0.0 && config_.refusal_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "refusal_prob must lie in [0, 1]");
  }
  if (!config_.tasks) throw Error(ErrorCode::kInvalidArgument, "simulated backend needs a task table");
  weights_ = quant::dequantize(config_.weights);
}

namespace {

constexpr std::uint64_t kRefusalStream = 0x52454655ULL;
constexpr std::uint64_t kTemplateStream = 0x544d504cULL;
constexpr std::uint64_t kNoiseStream = 0x4e4f4953ULL;

std::string render_answer(const std::string& label, std::uint64_t h) {
  switch (h % 3) {
    case 0: return "The answer is " + label + ".";
    case 1: return label;
    default: return "Answer: " + label;
  }
}

}  // namespace

GenerationResult SimBackend::generate(const PrecisionSpec& variant, const GenerationRequest& req) {
  GenerationResult result{variant, {}, std::chrono::milliseconds{0}, std::nullopt};
  const ToyItem* item = config_.tasks->find(req.instance_id);
  if (item == nullptr) {
    result.transport_error =
        TransportError{TransportErrorKind::kTransportFailure, 0, "unknown instance " + req.instance_id};
    return result;
  }
  if (item->labels.size() > weights_.rows() || item->features.size() != weights_.cols()) {
    result.transport_error = TransportError{TransportErrorKind::kTransportFailure, 0,
                                            "instance " + req.instance_id + " does not fit the weights"};
    return result;
  }

  const std::uint64_t id_hash = detail::fnv1a(req.instance_id);
  const double u_refuse = detail::unit_from_hash(detail::hash_combine(config_.seed, id_hash, kRefusalStream));
  if (u_refuse < config_.refusal_prob) {
    result.text = kSimRefusalText;
    return result;
  }

  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < item->labels.size(); ++k) {
    double s = simd::dot(weights_.row(k), item->features);
    if (const auto it = config_.error_profile.find(item->labels[k]); it != config_.error_profile.end()) {
      s += it->second;
    }
    if (config_.seed_noise != 0.0) {
      s += config_.seed_noise *
           detail::normal_from_hash(detail::hash_combine(config_.seed, id_hash, kNoiseStream, k));
    }
    if (s > best) {
      second = best;
      best = s;
      best_k = k;
    } else if (s > second) {
      second = s;
    }
  }
  if (config_.abstain_margin > 0.0 && best - second < config_.abstain_margin) {
    result.text = kSimRefusalText;
    return result;
  }
  result.text = render_answer(item->labels[best_k],
                              detail::hash_combine(config_.seed, id_hash, kTemplateStream));
  return result;
}

quant::TensorF make_dense_weights(std::size_t rows, std::size_t cols, std::uint64_t world_seed) {
  std::vector<double> data(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      data[r * cols + c] = detail::normal_from_hash(detail::hash_combine(world_seed, r, c));
    }
  }
  return quant::TensorF(rows, cols, std::move(data));
}

ToyItem make_toy_item(const TaskInstance& inst, const quant::TensorF& dense,
                      const ToyWorldParams& params) {
  ToyItem item;
  item.labels = inst.label_space.labels;
  item.features.assign(dense.cols(), 0.0);
  const std::uint64_t id_hash = detail::fnv1a(inst.id);
  for (std::size_t j = 0; j < dense.cols(); ++j) {
    item.features[j] = params.noise *
                       detail::normal_from_hash(detail::hash_combine(params.world_seed, id_hash, j));
  }
  if (const auto g = inst.label_space.index_of(inst.gold); g && *g < dense.rows()) {
    const auto row = dense.row(*g);
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (std::size_t j = 0; j < dense.cols(); ++j) {
        item.features[j] += params.margin * row[j] / norm;
      }
    }
  }
  return item;
}

}  // namespace qpv::backends
