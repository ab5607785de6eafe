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

#include "qpvote/core.hpp"

#include <algorithm>
#include <cmath>

#include "text_util.hpp"

namespace qpv {

PrecisionSpec::PrecisionSpec(int bits, std::uint64_t seed) : bits_(bits), seed_(seed) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw Error(ErrorCode::kBitsOutOfRange,
                "bits must lie in [2, 16], got " + std::to_string(bits));
  }
}

bool higher_precision(const PrecisionSpec& a, const PrecisionSpec& b) noexcept {
  if (a.bits() != b.bits()) return a.bits() > b.bits();
  return a.seed() < b.seed();
}

std::string to_string(const PrecisionSpec& spec) {
  return std::to_string(spec.bits()) + "b/s" + std::to_string(spec.seed());
}

void validate_variants(const std::vector<PrecisionSpec>& variants) {
  if (variants.empty()) throw Error(ErrorCode::kInvalidArgument, "ensemble needs at least one variant");
  std::vector<PrecisionSpec> sorted = variants;
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw Error(ErrorCode::kDuplicateVariant, "variant " + to_string(*dup) + " listed twice");
  }
}

void DecodingParams::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be finite and >= 0");
  }
  if (max_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be >= 1");
}

std::optional<std::size_t> LabelSpace::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (detail::iequals(labels[i], label)) return i;
  }
  return std::nullopt;
}

std::optional<std::string> LabelSpace::canonical(std::string_view text) const {
  if (auto i = index_of(text)) return labels[*i];
  return std::nullopt;
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kClassification: return "classification";
    case TaskKind::kOodOutOfScope: return "ood_out_of_scope";
    case TaskKind::kEthicsEvasive: return "ethics_evasive";
    case TaskKind::kEthicsPlain: return "ethics_plain";
  }
  return "classification";
}

std::optional<TaskKind> parse_task_kind(std::string_view text) {
  for (TaskKind k : {TaskKind::kClassification, TaskKind::kOodOutOfScope,
                     TaskKind::kEthicsEvasive, TaskKind::kEthicsPlain}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

const TaskInstance& validate_instance(const TaskInstance& inst) {
  const auto& labels = inst.label_space.labels;
  if (labels.size() < 2) {
    throw Error(ErrorCode::kInvalidLabelSpace, inst.id + ": label space needs at least 2 labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (detail::is_blank(labels[i])) {
      throw Error(ErrorCode::kInvalidLabelSpace, inst.id + ": empty label");
    }
    if (detail::iequals(labels[i], kRefusedLabel)) {
      throw Error(ErrorCode::kReservedLabel, inst.id + ": \"REFUSED\" is reserved");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (detail::iequals(labels[i], labels[j])) {
        throw Error(ErrorCode::kDuplicateLabel, inst.id + ": duplicate label \"" + labels[i] + "\"");
      }
    }
  }
  const bool gold_is_refusal = inst.gold == kRefusedLabel;
  const bool gold_in_space =
      std::find(labels.begin(), labels.end(), inst.gold) != labels.end();
  if (!gold_in_space && !(gold_is_refusal && inst.label_space.allows_refusal_label)) {
    throw Error(ErrorCode::kGoldNotInLabelSpace,
                inst.id + ": gold \"" + inst.gold + "\" is not a label");
  }
  if (inst.group.has_value() && inst.kind != TaskKind::kClassification) {
    throw Error(ErrorCode::kGroupOnNonClassification,
                inst.id + ": sensitive group given on a non-classification task");
  }
  return inst;
}

Candidate make_label(PrecisionSpec source, std::string label, std::string raw) {
  return Candidate{source, LabelVerdict{std::move(label)}, std::move(raw)};
}

Candidate make_refusal(PrecisionSpec source, std::string raw) {
  return Candidate{source, RefusalVerdict{}, std::move(raw)};
}

Candidate make_invalid(PrecisionSpec source, std::string reason, std::string raw) {
  return Candidate{source, InvalidVerdict{std::move(reason)}, std::move(raw)};
}

}  // namespace qpv
