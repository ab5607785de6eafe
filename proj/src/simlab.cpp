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

#include "qpvote/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hash_util.hpp"
#include "qpvote/backends.hpp"
#include "qpvote/ensemble.hpp"

namespace qpv::simlab {

namespace {

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void SimProfile::validate() const {
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "profile needs m >= 1");
  if (per_variant_error.size() != m || per_variant_refusal.size() != m) {
    throw Error(ErrorCode::kInvalidArgument, "per-variant lists must have length m");
  }
  if (!bits.empty() && bits.size() != m) throw Error(ErrorCode::kInvalidArgument, "bits must have length m");
  for (std::size_t i = 0; i < m; ++i) {
    if (!is_prob(per_variant_error[i]) || !is_prob(per_variant_refusal[i])) {
      throw Error(ErrorCode::kInvalidArgument, "probabilities must lie in [0, 1]");
    }
  }
  if (!is_prob(pairwise_error_correlation)) {
    throw Error(ErrorCode::kInvalidArgument, "correlation must lie in [0, 1]");
  }
  if (n_labels < 2) throw Error(ErrorCode::kInvalidArgument, "n_labels must be >= 2");
  validate_variants(variants());
}

std::vector<PrecisionSpec> SimProfile::variants() const {
  std::vector<PrecisionSpec> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int b = bits.empty() ? std::max(kMinBits, kMaxBits - static_cast<int>(i)) : bits[i];
    out.emplace_back(b, i);
  }
  return out;
}

std::string label_name(int index) { return "label_" + std::to_string(index); }

double exact_majority_error(int m, double p) {
  if (m <= 0) throw Error(ErrorCode::kInvalidArgument, "m must be positive");
  if (m % 2 == 0) {
    throw Error(ErrorCode::kEvenEnsemble, "closed form needs odd m; use brute_force_vote_error");
  }
  if (!is_prob(p)) throw Error(ErrorCode::kInvalidArgument, "p must lie in [0, 1]");
  double total = 0.0;
  double binom = 1.0;  // C(m, 0)
  for (int k = 0; k <= m; ++k) {
    if (k > 0) binom = binom * (m - k + 1) / k;
    if (2 * k > m) total += binom * std::pow(p, k) * std::pow(1.0 - p, m - k);
  }
  return total;
}

namespace {

// Verdict code per variant: 0..n_labels-1 = label, n_labels = refusal.
Candidate candidate_for(const PrecisionSpec& spec, int code, int n_labels) {
  if (code == n_labels) return make_refusal(spec);
  return make_label(spec, label_name(code));
}

bool vote_is_error(const std::vector<Candidate>& cands, const std::vector<std::string>& order) {
  const VoteOutcome o = ensemble::majority_vote(ensemble::filter_candidates(cands, false), order);
  return o.refused() || *o.decision != label_name(0);
}

std::vector<std::string> label_order(int n_labels) {
  std::vector<std::string> order;
  for (int l = 0; l < n_labels; ++l) order.push_back(label_name(l));
  return order;
}

void check_enumerable(const SimProfile& profile) {
  profile.validate();
  if (profile.m > 12) throw Error(ErrorCode::kTooLarge, "enumeration is bounded to m <= 12");
  const double tuples = std::pow(static_cast<double>(profile.n_labels + 1), static_cast<double>(profile.m));
  if (tuples > 5e7) throw Error(ErrorCode::kTooLarge, "too many verdict tuples to enumerate");
}

}  // namespace

double brute_force_vote_error(const SimProfile& profile) {
  check_enumerable(profile);
  if (profile.pairwise_error_correlation != 0.0) {
    throw Error(ErrorCode::kContractError, "brute force enumeration assumes independent errors");
  }
  const int n = profile.n_labels;
  const std::size_t m = profile.m;
  const auto specs = profile.variants();
  const auto order = label_order(n);

  // Per-variant distribution over verdict codes.
  std::vector<std::vector<double>> dist(m, std::vector<double>(n + 1));
  for (std::size_t i = 0; i < m; ++i) {
    const double r = profile.per_variant_refusal[i];
    const double p = profile.per_variant_error[i];
    dist[i][0] = (1.0 - r) * (1.0 - p);
    for (int l = 1; l < n; ++l) dist[i][l] = (1.0 - r) * p / (n - 1);
    dist[i][n] = r;
  }

  double total = 0.0;
  std::vector<int> code(m, 0);
  std::vector<Candidate> cands;
  for (;;) {
    double prob = 1.0;
    for (std::size_t i = 0; i < m && prob != 0.0; ++i) prob *= dist[i][code[i]];
    if (prob != 0.0) {
      cands.clear();
      for (std::size_t i = 0; i < m; ++i) cands.push_back(candidate_for(specs[i], code[i], n));
      if (vote_is_error(cands, order)) total += prob;
    }
    std::size_t i = 0;
    while (i < m && ++code[i] > n) code[i++] = 0;
    if (i == m) break;
  }
  return total;
}

double expected_vote_error(const SimProfile& profile) {
  check_enumerable(profile);
  const double rho = profile.pairwise_error_correlation;
  SimProfile indep = profile;
  indep.pairwise_error_correlation = 0.0;
  const double e_indep = rho < 1.0 ? brute_force_vote_error(indep) : 0.0;
  if (rho == 0.0) return e_indep;

  // Shared regime: one uniform u decides who errs (variant i errs iff u < p_i),
  // and all erring variants name the same wrong label. By symmetry the wrong
  // label can be fixed to label 1. Refusals stay independent.
  const std::size_t m = profile.m;
  const auto specs = profile.variants();
  const auto order = label_order(profile.n_labels);
  std::vector<double> cuts = profile.per_variant_error;
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double e_shared = 0.0;
  std::vector<Candidate> cands;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double width = cuts[c + 1] - cuts[c];
    if (width <= 0.0) continue;
    const double u = 0.5 * (cuts[c] + cuts[c + 1]);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      double prob = width;
      cands.clear();
      for (std::size_t i = 0; i < m; ++i) {
        const bool refuses = (mask >> i) & 1U;
        const double r = profile.per_variant_refusal[i];
        prob *= refuses ? r : 1.0 - r;
        if (refuses) {
          cands.push_back(make_refusal(specs[i]));
        } else {
          cands.push_back(make_label(specs[i], label_name(u < profile.per_variant_error[i] ? 1 : 0)));
        }
      }
      if (prob != 0.0 && vote_is_error(cands, order)) e_shared += prob;
    }
  }
  return (1.0 - rho) * e_indep + rho * e_shared;
}

double SimReport::best_single_accuracy() const {
  double best = 0.0;
  for (const auto& v : per_variant) best = std::max(best, 1.0 - v.error_rate);
  return best;
}

namespace {

constexpr std::uint64_t kCommonStream = 1;
constexpr std::uint64_t kSharedErrStream = 2;
constexpr std::uint64_t kSharedWrongStream = 3;
constexpr std::uint64_t kErrStream = 4;
constexpr std::uint64_t kWrongStream = 5;
constexpr std::uint64_t kRefuseStream = 6;

struct Tally {
  std::size_t errors = 0;
  std::size_t refusals = 0;
  std::size_t tiebreaks = 0;
  std::vector<std::size_t> v_errors;
  std::vector<std::size_t> v_refusals;
};

}  // namespace

SimReport monte_carlo(const SimProfile& profile, std::size_t n_instances) {
  profile.validate();
  if (n_instances == 0) throw Error(ErrorCode::kInvalidArgument, "n_instances must be >= 1");
  const std::size_t m = profile.m;
  const int n = profile.n_labels;
  const auto specs = profile.variants();
  const auto order = label_order(n);
  const std::uint64_t seed = profile.seed;

  auto draw = [&](std::uint64_t j, std::uint64_t stream, std::uint64_t i) {
    return detail::unit_from_hash(detail::hash_combine(seed, j, stream, i));
  };
  auto wrong_label = [&](double u) {
    const int k = std::min(n - 2, static_cast<int>(u * (n - 1)));
    return 1 + k;
  };

  const std::size_t n_chunks = std::max<std::size_t>(1, std::min<std::size_t>(64, n_instances / 256));
  std::vector<Tally> chunks(n_chunks);
  const std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
  backends::parallel_for_bounded(n_chunks, threads, [&](std::size_t c) {
    Tally& t = chunks[c];
    t.v_errors.assign(m, 0);
    t.v_refusals.assign(m, 0);
    const std::size_t begin = c * n_instances / n_chunks;
    const std::size_t end = (c + 1) * n_instances / n_chunks;
    std::vector<Candidate> cands;
    cands.reserve(m);
    for (std::size_t j = begin; j < end; ++j) {
      const bool shared = draw(j, kCommonStream, 0) < profile.pairwise_error_correlation;
      const double shared_u = draw(j, kSharedErrStream, 0);
      const int shared_wrong = wrong_label(draw(j, kSharedWrongStream, 0));
      cands.clear();
      for (std::size_t i = 0; i < m; ++i) {
        if (draw(j, kRefuseStream, i) < profile.per_variant_refusal[i]) {
          cands.push_back(make_refusal(specs[i]));
          ++t.v_refusals[i];
          ++t.v_errors[i];
          continue;
        }
        const double u = shared ? shared_u : draw(j, kErrStream, i);
        int code = 0;
        if (u < profile.per_variant_error[i]) {
          code = shared ? shared_wrong : wrong_label(draw(j, kWrongStream, i));
          ++t.v_errors[i];
        }
        cands.push_back(make_label(specs[i], label_name(code)));
      }
      const VoteOutcome o = ensemble::majority_vote(ensemble::filter_candidates(cands, false), order);
      if (o.refused()) {
        ++t.refusals;
        ++t.errors;
      } else if (*o.decision != label_name(0)) {
        ++t.errors;
      }
      t.tiebreaks += o.tiebreak_used;
    }
  });

  SimReport rep;
  rep.n_instances = n_instances;
  rep.seed = seed;
  std::vector<std::size_t> v_err(m, 0);
  std::vector<std::size_t> v_ref(m, 0);
  for (const Tally& t : chunks) {
    rep.errors += t.errors;
    rep.refusals += t.refusals;
    rep.tiebreaks += t.tiebreaks;
    for (std::size_t i = 0; i < m; ++i) {
      v_err[i] += t.v_errors[i];
      v_ref[i] += t.v_refusals[i];
    }
  }
  const double nn = static_cast<double>(n_instances);
  rep.error_rate = static_cast<double>(rep.errors) / nn;
  rep.refusal_rate = static_cast<double>(rep.refusals) / nn;
  rep.accuracy = 1.0 - rep.error_rate;
  for (std::size_t i = 0; i < m; ++i) {
    rep.per_variant.push_back({specs[i], v_err[i], v_ref[i], static_cast<double>(v_err[i]) / nn,
                               static_cast<double>(v_ref[i]) / nn});
  }
  return rep;
}

}  // namespace qpv::simlab
