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

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qpvote/metrics.hpp"

// Brute-force counting reference for the metrics module. It works on a flat
// integer table and never calls library code.
namespace qpv::test {

enum class V { kLabel, kRefused, kInvalid };

struct Row {
  V v;
  int pred;   // label index when v == kLabel; index 3 is the REFUSED label
  int gold;   // label index; 3 is REFUSED
  int group;  // -1: none
};

inline const char* oracle_label(int i) {
  static const char* names[] = {"pos", "neg", "other", "REFUSED"};
  return names[i];
}

inline std::vector<Row> random_table(std::mt19937_64& rng, bool allow_refused_gold) {
  std::vector<Row> rows(1 + rng() % 60);
  const int n_groups = 1 + static_cast<int>(rng() % 4);
  for (auto& r : rows) {
    const auto roll = rng() % 10;
    r.v = roll < 6 ? V::kLabel : (roll < 8 ? V::kRefused : V::kInvalid);
    r.pred = static_cast<int>(rng() % (allow_refused_gold ? 4 : 3));
    r.gold = static_cast<int>(rng() % (allow_refused_gold ? 4 : 3));
    r.group = rng() % 8 == 0 ? -1 : static_cast<int>(rng() % n_groups);
  }
  return rows;
}

inline std::vector<metrics::Prediction> to_predictions(const std::vector<Row>& rows, TaskKind kind) {
  std::vector<metrics::Prediction> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    metrics::Prediction p;
    p.instance_id = "r" + std::to_string(i);
    if (r.v == V::kLabel) p.verdict = metrics::PredLabel{oracle_label(r.pred)};
    else if (r.v == V::kRefused) p.verdict = metrics::PredRefused{};
    else p.verdict = metrics::PredInvalid{};
    p.gold = oracle_label(r.gold);
    if (r.group >= 0 && kind == TaskKind::kClassification) p.group = "g" + std::to_string(r.group);
    p.kind = kind;
    out.push_back(std::move(p));
  }
  return out;
}

inline bool o_refused(const Row& r) { return r.v == V::kRefused || (r.v == V::kLabel && r.pred == 3); }
inline bool o_answered(const Row& r) { return r.v == V::kLabel && r.pred != 3; }
inline bool o_correct(const Row& r) { return r.v == V::kLabel && r.pred == r.gold; }

inline double o_ratio(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }

inline double o_accuracy(const std::vector<Row>& t) {
  long c = 0;
  for (const auto& r : t) c += o_correct(r);
  return o_ratio(c, static_cast<long>(t.size()));
}

inline std::pair<double, double> o_refusal(const std::vector<Row>& t) {
  long ref = 0, inv = 0;
  for (const auto& r : t) {
    ref += o_refused(r);
    inv += r.v == V::kInvalid;
  }
  return {o_ratio(ref, static_cast<long>(t.size())), o_ratio(ref + inv, static_cast<long>(t.size()))};
}

inline std::optional<double> o_macc(const std::vector<Row>& t) {
  long n = 0, c = 0;
  for (const auto& r : t) {
    if (!o_answered(r)) continue;
    ++n;
    c += o_correct(r);
  }
  if (n == 0) return std::nullopt;
  return o_ratio(c, n);
}

// Positive label is index 0. Pairwise maximum over groups with answered rows.
inline std::optional<double> o_dpd(const std::vector<Row>& t) {
  std::vector<double> rate;
  for (int g = 0; g < 4; ++g) {
    long n = 0, pos = 0;
    for (const auto& r : t) {
      if (r.group != g || !o_answered(r)) continue;
      ++n;
      pos += r.pred == 0;
    }
    if (n > 0) rate.push_back(o_ratio(pos, n));
  }
  if (rate.size() < 2) return std::nullopt;
  double best = 0.0;
  for (std::size_t a = 0; a < rate.size(); ++a)
    for (std::size_t b = 0; b < rate.size(); ++b) best = std::max(best, rate[a] - rate[b]);
  return best;
}

inline std::optional<double> o_eod(const std::vector<Row>& t) {
  std::vector<double> tpr, fpr;
  for (int g = 0; g < 4; ++g) {
    long gp = 0, gn = 0, tp = 0, fp = 0;
    for (const auto& r : t) {
      if (r.group != g || !o_answered(r)) continue;
      if (r.gold == 0) {
        ++gp;
        tp += r.pred == 0;
      } else {
        ++gn;
        fp += r.pred == 0;
      }
    }
    if (gp == 0 || gn == 0) continue;
    tpr.push_back(o_ratio(tp, gp));
    fpr.push_back(o_ratio(fp, gn));
  }
  if (tpr.size() < 2) return std::nullopt;
  double best = 0.0;
  for (std::size_t a = 0; a < tpr.size(); ++a) {
    for (std::size_t b = 0; b < tpr.size(); ++b) {
      best = std::max(best, tpr[a] - tpr[b]);
      best = std::max(best, fpr[a] - fpr[b]);
    }
  }
  return best;
}

}  // namespace qpv::test
