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

#include <vector>

#include "qpvote/backends.hpp"
#include "qpvote/core.hpp"
#include "qpvote/postprocess.hpp"

namespace qpv::ensemble {

struct EnsembleConfig {
  std::vector<PrecisionSpec> variants;
  // Keep refusals as Label("REFUSED") for instances whose label space allows it.
  // When false every instance is treated as plain classification.
  bool ood_mode = true;
  std::size_t concurrency_limit = 4;

  void validate() const { validate_variants(variants); }
};

// Drops Invalid always and Refusal unless ood_mode. Order is preserved.
std::vector<Candidate> filter_candidates(const std::vector<Candidate>& cands, bool ood_mode);

// Unweighted plurality over post-filter candidates. Empty input -> Refused.
// Ties go to the tied label whose strongest supporter has the most bits, then
// the lowest seed, then the earliest position in `label_order` (lexicographic
// when a label is not listed). The result does not depend on input order.
// Throws kContractError if an Invalid or Refusal candidate is present.
VoteOutcome majority_vote(const std::vector<Candidate>& cands,
                          const std::vector<std::string>& label_order = {});

struct InstanceRecord {
  VoteOutcome outcome;
  std::vector<backends::GenerationResult> generations;  // one per variant, config order
  std::vector<Candidate> candidates;                    // one per variant, config order
  bool ood = false;                                     // refusals kept as labels
};

// Generate -> extract -> filter -> vote for one instance. Transport errors become
// Invalid("transport") candidates.
InstanceRecord run_instance(const TaskInstance& inst, const EnsembleConfig& cfg,
                            const backends::BackendRegistry& registry,
                            const post::RefusalLexicon& lexicon,
                            const DecodingParams& params = {});

// Whether run_instance would route this instance through OOD extraction.
bool uses_ood_extraction(const TaskInstance& inst, const EnsembleConfig& cfg);

}  // namespace qpv::ensemble
