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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpv {

enum class ErrorCode {
  kInvalidArgument,
  kContractError,
  // core
  kDuplicateLabel,
  kGoldNotInLabelSpace,
  kGroupOnNonClassification,
  kInvalidLabelSpace,
  kReservedLabel,
  kDuplicateVariant,
  // quantizer
  kBitsOutOfRange,
  kNonFiniteInput,
  // metrics
  kEmptyInput,
  kInsufficientGroups,
  kDegenerateGroup,
  kAllRefused,
  // simlab
  kEvenEnsemble,
  kTooLarge,
  // harness
  kParseError,
  kValidationError,
  kEmptyDataset,
  kConfigError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Dataset ingestion failure. `lines` are 1-based; a duplicate id reports both lines.
class DatasetError : public Error {
 public:
  DatasetError(ErrorCode code, std::vector<std::size_t> lines, const std::string& message);

  const std::vector<std::size_t>& lines() const noexcept { return lines_; }

 private:
  std::vector<std::size_t> lines_;
};

}  // namespace qpv
