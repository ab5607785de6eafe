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

#include "qpvote/quantizer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qpvote/error.hpp"
#include "qpvote/kernels.hpp"

namespace qpv::quant {

TensorF::TensorF(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kInvalidArgument,
                "tensor data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "tensor holds a non-finite value");
  }
}

namespace {

double group_scale(double amax, std::int32_t qmax) {
  if (amax == 0.0) return 1.0;
  const double q = static_cast<double>(qmax);
  double s = amax / q;
  if (!(s > 0.0)) return std::numeric_limits<double>::denorm_min();
  // Converges in at most a couple of steps; usually s is already a fixed point.
  for (int i = 0; i < 4; ++i) {
    const double next = (q * s) / q;
    if (next == s || !(next > 0.0)) break;
    s = next;
  }
  return s;
}

}  // namespace

QuantizedTensor quantize_rtn(const TensorF& t, int bits, std::size_t group_size) {
  if (bits < 2 || bits > 16) {
    throw Error(ErrorCode::kBitsOutOfRange, "bits must lie in [2, 16], got " + std::to_string(bits));
  }
  if (group_size == 0) throw Error(ErrorCode::kInvalidArgument, "group_size must be >= 1");

  QuantizedTensor q;
  q.bits = bits;
  q.group_size = group_size;
  q.rows = t.rows();
  q.cols = t.cols();
  q.codes.resize(t.size());
  const std::size_t n_groups = (t.size() + group_size - 1) / group_size;
  q.scales.resize(n_groups);

  const auto data = t.data();
  const auto& k = simd::active_kernels();
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t begin = g * group_size;
    const std::size_t len = std::min(group_size, t.size() - begin);
    const double amax = k.max_abs(data.data() + begin, len);
    const double s = group_scale(amax, q.qmax());
    q.scales[g] = s;
    k.quantize(data.data() + begin, len, s, q.qmin(), q.qmax(), q.codes.data() + begin);
  }
  return q;
}

void check_invariants(const QuantizedTensor& q) {
  if (q.bits < 2 || q.bits > 16) throw Error(ErrorCode::kContractError, "bits out of range");
  if (q.group_size == 0) throw Error(ErrorCode::kContractError, "group_size is zero");
  if (q.codes.size() != q.rows * q.cols) throw Error(ErrorCode::kContractError, "codes/shape mismatch");
  if (q.scales.size() != (q.codes.size() + q.group_size - 1) / q.group_size) {
    throw Error(ErrorCode::kContractError, "scale count does not match group count");
  }
  for (double s : q.scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::kContractError, "scale must be positive");
  }
  for (std::int32_t c : q.codes) {
    if (c < q.qmin() || c > q.qmax()) throw Error(ErrorCode::kContractError, "code outside bit range");
  }
}

TensorF dequantize(const QuantizedTensor& q) {
  check_invariants(q);
  std::vector<double> out(q.codes.size());
  const auto& k = simd::active_kernels();
  for (std::size_t g = 0; g < q.scales.size(); ++g) {
    const std::size_t begin = g * q.group_size;
    const std::size_t len = std::min(q.group_size, q.codes.size() - begin);
    k.dequantize(q.codes.data() + begin, len, q.scales[g], out.data() + begin);
  }
  return TensorF(q.rows, q.cols, std::move(out));
}

}  // namespace qpv::quant
