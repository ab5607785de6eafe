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

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qpvote/backends.hpp"
#include "qpvote/quantizer.hpp"

namespace qpv::backends {

// What the simulated model "sees" for one instance: its label vocabulary and a
// feature vector for the linear scorer.
struct ToyItem {
  std::vector<std::string> labels;
  std::vector<double> features;
};

class ToyTaskTable {
 public:
  void add(std::string instance_id, ToyItem item);
  const ToyItem* find(const std::string& instance_id) const;
  std::size_t size() const noexcept { return items_.size(); }

 private:
  std::map<std::string, ToyItem> items_;
};

struct SimBackendConfig {
  quant::QuantizedTensor weights;            // rows = label slots, cols = features
  double refusal_prob = 0.0;                 // in [0, 1]
  std::map<std::string, double> error_profile;  // label -> additive score bias
  std::uint64_t seed = 0;
  double seed_noise = 0.0;     // std-dev of the per-(seed, instance, label) score jitter
  double abstain_margin = 0.0; // refuse when top-1 minus top-2 score falls below this
  std::shared_ptr<const ToyTaskTable> tasks;
};

inline constexpr const char* kSimRefusalText = "I don't know.";

// Deterministic toy model: scores labels with the dequantized weights and
// answers in prose. The output is a pure function of (config, instance id).
class SimBackend : public Backend {
 public:
  explicit SimBackend(SimBackendConfig config);

  GenerationResult generate(const PrecisionSpec& variant, const GenerationRequest& req) override;

  const SimBackendConfig& config() const noexcept { return config_; }
  const quant::TensorF& effective_weights() const noexcept { return weights_; }

 private:
  SimBackendConfig config_;
  quant::TensorF weights_;
};

// Gaussian-like dense weights, a pure function of (rows, cols, world_seed).
quant::TensorF make_dense_weights(std::size_t rows, std::size_t cols, std::uint64_t world_seed);

struct ToyWorldParams {
  double margin = 1.0;   // signal strength along the gold label's weight row
  double noise = 1.0;    // per-instance feature noise
  std::uint64_t world_seed = 0;
};

// Features = margin * unit(dense row of gold) + noise * z(instance id). A gold
// outside the label space (e.g. REFUSED) gets noise only.
ToyItem make_toy_item(const TaskInstance& inst, const quant::TensorF& dense,
                      const ToyWorldParams& params);

}  // namespace qpv::backends
