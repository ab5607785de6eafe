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
#include <vector>

#include "qpvote/core.hpp"

namespace qpv::simlab {

// Synthetic ensemble: m variants with per-variant error and refusal
// probabilities. Errors are correlated through a shared-difficulty latent:
// with probability `pairwise_error_correlation` every variant reads one common
// error draw (and one common wrong label), otherwise each draws independently.
// Refusals are always independent. The gold label is label 0.
struct SimProfile {
  std::size_t m = 3;
  std::vector<double> per_variant_error;
  std::vector<double> per_variant_refusal;
  double pairwise_error_correlation = 0.0;
  int n_labels = 2;
  std::uint64_t seed = 0;
  // Bit-width per variant; defaults to 16, 15, 14, ... so earlier variants
  // win tie-breaks.
  std::vector<int> bits;

  void validate() const;
  std::vector<PrecisionSpec> variants() const;
};

std::string label_name(int index);

// Sum_{k >= ceil(m/2)} C(m,k) p^k (1-p)^(m-k): binary majority error of m
// independent voters. Throws kEvenEnsemble for even m, kInvalidArgument for p
// outside [0, 1] or m == 0.
double exact_majority_error(int m, double p);

// Expected ensemble error (Refused counts as an error) by enumerating all
// (n_labels + 1)^m verdict tuples through the production filter and vote.
// Requires independent errors. Throws kTooLarge for m > 12.
double brute_force_vote_error(const SimProfile& profile);

// Exact expectation under the correlation model: mixes brute_force_vote_error
// with an enumeration of the shared-draw regime.
double expected_vote_error(const SimProfile& profile);

struct VariantStats {
  PrecisionSpec spec;
  std::size_t errors = 0;    // wrong label or refusal
  std::size_t refusals = 0;
  double error_rate = 0.0;
  double refusal_rate = 0.0;
};

struct SimReport {
  std::size_t n_instances = 0;
  std::uint64_t seed = 0;
  std::size_t errors = 0;
  std::size_t refusals = 0;
  std::size_t tiebreaks = 0;
  double error_rate = 0.0;
  double refusal_rate = 0.0;
  double accuracy = 0.0;
  std::vector<VariantStats> per_variant;

  double best_single_accuracy() const;
};

// Seeded, reproducible simulation through the production ensemble path. Each
// instance draws from counter-based hashes, so the result does not depend on
// thread count.
SimReport monte_carlo(const SimProfile& profile, std::size_t n_instances);

}  // namespace qpv::simlab
