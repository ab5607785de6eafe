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

#include "qpvote/ensemble.hpp"

#include <algorithm>

namespace qpv::ensemble {

std::vector<Candidate> filter_candidates(const std::vector<Candidate>& cands, bool ood_mode) {
  std::vector<Candidate> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    if (c.is_invalid()) continue;
    if (c.is_refusal() && !ood_mode) continue;
    out.push_back(c);
  }
  return out;
}

namespace {

struct Support {
  int votes = 0;
  const PrecisionSpec* strongest = nullptr;
};

std::size_t order_rank(const std::string& label, const std::vector<std::string>& order) {
  const auto it = std::find(order.begin(), order.end(), label);
  return it == order.end() ? order.size() : static_cast<std::size_t>(it - order.begin());
}

}  // namespace

VoteOutcome majority_vote(const std::vector<Candidate>& cands,
                          const std::vector<std::string>& label_order) {
  VoteOutcome out;
  if (cands.empty()) return out;

  std::map<std::string, Support> support;
  for (const auto& c : cands) {
    if (!c.is_label()) {
      throw Error(ErrorCode::kContractError,
                  "majority_vote received a " + std::string(c.is_invalid() ? "Invalid" : "Refusal") +
                      " candidate from " + to_string(c.source));
    }
    Support& s = support[c.label()];
    ++s.votes;
    if (s.strongest == nullptr || higher_precision(c.source, *s.strongest)) s.strongest = &c.source;
    out.survivors.push_back(c.source);
  }
  std::sort(out.survivors.begin(), out.survivors.end(), higher_precision);

  int top = 0;
  for (const auto& [label, s] : support) {
    out.tally[label] = s.votes;
    top = std::max(top, s.votes);
  }

  const std::string* winner = nullptr;
  int tied = 0;
  for (const auto& [label, s] : support) {
    if (s.votes != top) continue;
    ++tied;
    if (winner == nullptr) {
      winner = &label;
      continue;
    }
    const Support& w = support.at(*winner);
    if (higher_precision(*s.strongest, *w.strongest)) {
      winner = &label;
    } else if (!higher_precision(*w.strongest, *s.strongest)) {
      // Identical strongest supporter: fall back to label-space order.
      const auto ra = order_rank(label, label_order);
      const auto rb = order_rank(*winner, label_order);
      if (ra < rb || (ra == rb && label < *winner)) winner = &label;
    }
  }
  out.decision = *winner;
  out.tiebreak_used = tied > 1;
  return out;
}

bool uses_ood_extraction(const TaskInstance& inst, const EnsembleConfig& cfg) {
  return cfg.ood_mode && inst.label_space.allows_refusal_label;
}

InstanceRecord run_instance(const TaskInstance& inst, const EnsembleConfig& cfg,
                            const backends::BackendRegistry& registry,
                            const post::RefusalLexicon& lexicon, const DecodingParams& params) {
  cfg.validate();
  for (const auto& v : cfg.variants) {
    if (!registry.contains(v)) {
      throw Error(ErrorCode::kConfigError, "variant " + to_string(v) + " has no backend");
    }
  }

  InstanceRecord rec;
  rec.ood = uses_ood_extraction(inst, cfg);
  const backends::GenerationRequest req{inst.id, inst.prompt, params};
  rec.generations = backends::generate_ensemble(registry, cfg.variants, req,
                                                {cfg.concurrency_limit, {}});

  rec.candidates.reserve(rec.generations.size());
  for (const auto& g : rec.generations) {
    if (!g.ok()) {
      rec.candidates.push_back(make_invalid(g.source, "transport", g.text));
    } else if (rec.ood) {
      rec.candidates.push_back(post::extract_candidate_ood(g.text, inst.label_space, lexicon, g.source));
    } else {
      rec.candidates.push_back(post::extract_candidate(g.text, inst.label_space, lexicon, g.source));
    }
  }
  std::vector<std::string> order = inst.label_space.labels;
  if (rec.ood) order.emplace_back(kRefusedLabel);
  rec.outcome = majority_vote(filter_candidates(rec.candidates, rec.ood), order);
  return rec;
}

}  // namespace qpv::ensemble
