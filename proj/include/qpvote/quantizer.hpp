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
#include <cstdint>
#include <span>
#include <vector>

namespace qpv::quant {

// Dense row-major tensor of finite doubles.
class TensorF {
 public:
  TensorF() = default;
  // Throws kInvalidArgument on a size mismatch and kNonFiniteInput on NaN/inf.
  TensorF(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return std::span(data_).subspan(r * cols_, cols_); }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const TensorF&, const TensorF&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Symmetric group-wise code tensor. Groups run over the flattened row-major data;
// the last group may be partial.
struct QuantizedTensor {
  int bits = 8;
  std::size_t group_size = 1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> codes;
  std::vector<double> scales;

  std::int32_t qmin() const noexcept { return -(std::int32_t{1} << (bits - 1)); }
  std::int32_t qmax() const noexcept { return (std::int32_t{1} << (bits - 1)) - 1; }
  std::size_t num_groups() const noexcept { return scales.size(); }
  double scale_of(std::size_t element) const { return scales[element / group_size]; }

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

// Round-to-nearest, ties away from zero. Per group g:
//   scale = max|w| / (2^(bits-1) - 1)   (1 for an all-zero group)
//   code  = clamp(round(w / scale), -2^(bits-1), 2^(bits-1) - 1)
// The scale is nudged to the nearest fixed point of s -> (qmax*s)/qmax so that
// re-quantizing a dequantized tensor reproduces the same scales exactly.
// Throws kBitsOutOfRange or kInvalidArgument (group_size == 0).
QuantizedTensor quantize_rtn(const TensorF& t, int bits, std::size_t group_size);

TensorF dequantize(const QuantizedTensor& q);

// Throws kContractError if `q` breaks its invariants (code range, scale count, shape).
void check_invariants(const QuantizedTensor& q);

}  // namespace qpv::quant
