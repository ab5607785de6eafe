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

#include "qpvote/error.hpp"

namespace qpv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kContractError: return "ContractError";
    case ErrorCode::kDuplicateLabel: return "DuplicateLabel";
    case ErrorCode::kGoldNotInLabelSpace: return "GoldNotInLabelSpace";
    case ErrorCode::kGroupOnNonClassification: return "GroupOnNonClassification";
    case ErrorCode::kInvalidLabelSpace: return "InvalidLabelSpace";
    case ErrorCode::kReservedLabel: return "ReservedLabel";
    case ErrorCode::kDuplicateVariant: return "DuplicateVariant";
    case ErrorCode::kBitsOutOfRange: return "BitsOutOfRange";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInsufficientGroups: return "InsufficientGroups";
    case ErrorCode::kDegenerateGroup: return "DegenerateGroup";
    case ErrorCode::kAllRefused: return "AllRefused";
    case ErrorCode::kEvenEnsemble: return "EvenEnsemble";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

DatasetError::DatasetError(ErrorCode code, std::vector<std::size_t> lines,
                           const std::string& message)
    : Error(code, message), lines_(std::move(lines)) {}

}  // namespace qpv
