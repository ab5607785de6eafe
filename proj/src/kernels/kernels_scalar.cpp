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

#include <cmath>

#include "kernels_internal.hpp"

namespace qpv::simd::detail {
namespace {

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

// x - trunc(x) is exact, so this agrees with std::round for every double.
double round_half_away(double x) {
  const double t = std::trunc(x);
  const double frac = x - t;
  if (frac >= 0.5) return t + 1.0;
  if (frac <= -0.5) return t - 1.0;
  return t;
}

void quantize_scalar(const double* x, std::size_t n, double scale, std::int32_t qmin,
                     std::int32_t qmax, std::int32_t* codes) {
  const double lo = qmin;
  const double hi = qmax;
  for (std::size_t i = 0; i < n; ++i) {
    double q = round_half_away(x[i] / scale);
    q = q < lo ? lo : (q > hi ? hi : q);
    codes[i] = static_cast<std::int32_t>(q);
  }
}

void dequantize_scalar(const std::int32_t* codes, std::size_t n, double scale, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(codes[i]) * scale;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double p = a[i + j] * b[i + j];
      lane[j] = lane[j] + p;
    }
  }
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::kScalar, max_abs_scalar, quantize_scalar,
                                 dequantize_scalar, dot_scalar};
  return table;
}

}  // namespace qpv::simd::detail
