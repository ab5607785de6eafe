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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpvote/error.hpp"

namespace qpv {

// Reserved abstention label. Never a member of LabelSpace::labels.
inline constexpr std::string_view kRefusedLabel = "REFUSED";

inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 16;

// One quantized instantiation of the dense model: bit-width plus the seed that
// distinguishes same-bit variants.
class PrecisionSpec {
 public:
  PrecisionSpec(int bits, std::uint64_t seed);

  int bits() const noexcept { return bits_; }
  std::uint64_t seed() const noexcept { return seed_; }

  friend auto operator<=>(const PrecisionSpec&, const PrecisionSpec&) = default;

 private:
  int bits_;
  std::uint64_t seed_;
};

// Strict ordering used for tie-breaking: more bits first, then lower seed.
bool higher_precision(const PrecisionSpec& a, const PrecisionSpec& b) noexcept;

std::string to_string(const PrecisionSpec& spec);

// Throws kDuplicateVariant when two entries share (bits, seed), and
// kInvalidArgument when the list is empty.
void validate_variants(const std::vector<PrecisionSpec>& variants);

struct DecodingParams {
  double temperature = 0.0;
  int max_tokens = 64;
  std::vector<std::string> stop_sequences;

  void validate() const;
};

struct LabelSpace {
  std::vector<std::string> labels;
  bool allows_refusal_label = false;

  // Case-insensitive lookup returning the canonical label.
  std::optional<std::string> canonical(std::string_view text) const;
  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return index_of(label).has_value(); }
};

enum class TaskKind { kClassification, kOodOutOfScope, kEthicsEvasive, kEthicsPlain };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> parse_task_kind(std::string_view text);

struct TaskInstance {
  std::string id;
  std::string prompt;
  LabelSpace label_space;
  std::string gold;
  std::optional<std::string> group;
  TaskKind kind = TaskKind::kClassification;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

inline bool operator==(const LabelSpace& a, const LabelSpace& b) {
  return a.labels == b.labels && a.allows_refusal_label == b.allows_refusal_label;
}

// Returns `inst` unchanged when every invariant holds; throws qpv::Error otherwise
// (kDuplicateLabel, kGoldNotInLabelSpace, kGroupOnNonClassification,
// kInvalidLabelSpace, kReservedLabel).
const TaskInstance& validate_instance(const TaskInstance& inst);

struct LabelVerdict {
  std::string label;
  friend bool operator==(const LabelVerdict&, const LabelVerdict&) = default;
};
struct RefusalVerdict {
  friend bool operator==(const RefusalVerdict&, const RefusalVerdict&) = default;
};
struct InvalidVerdict {
  std::string reason;
  friend bool operator==(const InvalidVerdict&, const InvalidVerdict&) = default;
};

using Verdict = std::variant<LabelVerdict, RefusalVerdict, InvalidVerdict>;

struct Candidate {
  PrecisionSpec source;
  Verdict verdict;
  std::string raw;

  bool is_label() const { return std::holds_alternative<LabelVerdict>(verdict); }
  bool is_refusal() const { return std::holds_alternative<RefusalVerdict>(verdict); }
  bool is_invalid() const { return std::holds_alternative<InvalidVerdict>(verdict); }
  const std::string& label() const { return std::get<LabelVerdict>(verdict).label; }

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

Candidate make_label(PrecisionSpec source, std::string label, std::string raw = {});
Candidate make_refusal(PrecisionSpec source, std::string raw = {});
Candidate make_invalid(PrecisionSpec source, std::string reason, std::string raw = {});

struct VoteOutcome {
  // nullopt encodes the distinguished REFUSED outcome.
  std::optional<std::string> decision;
  std::map<std::string, int> tally;
  bool tiebreak_used = false;
  std::vector<PrecisionSpec> survivors;

  bool refused() const noexcept { return !decision.has_value(); }

  friend bool operator==(const VoteOutcome&, const VoteOutcome&) = default;
};

}  // namespace qpv
