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

#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace qpv::simd::detail {
namespace {

double max_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = lanes[0];
  for (int j = 1; j < 4; ++j) m = lanes[j] > m ? lanes[j] : m;
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

inline __m256d round_half_away(__m256d v) {
  const __m256d t = _mm256_round_pd(v, _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
  const __m256d frac = _mm256_sub_pd(v, t);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d up = _mm256_and_pd(_mm256_cmp_pd(frac, _mm256_set1_pd(0.5), _CMP_GE_OQ), one);
  const __m256d dn = _mm256_and_pd(_mm256_cmp_pd(frac, _mm256_set1_pd(-0.5), _CMP_LE_OQ), one);
  return _mm256_sub_pd(_mm256_add_pd(t, up), dn);
}

void quantize_avx2(const double* x, std::size_t n, double scale, std::int32_t qmin,
                   std::int32_t qmax, std::int32_t* codes) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d lo = _mm256_set1_pd(static_cast<double>(qmin));
  const __m256d hi = _mm256_set1_pd(static_cast<double>(qmax));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d q = round_half_away(_mm256_div_pd(_mm256_loadu_pd(x + i), vs));
    q = _mm256_min_pd(_mm256_max_pd(q, lo), hi);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(codes + i), _mm256_cvtpd_epi32(q));
  }
  if (i < n) scalar_table().quantize(x + i, n - i, scale, qmin, qmax, codes + i);
}

void dequantize_avx2(const std::int32_t* codes, std::size_t n, double scale, double* out) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i c = _mm_loadu_si128(reinterpret_cast<const __m128i*>(codes + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_cvtepi32_pd(c), vs));
  }
  if (i < n) scalar_table().dequantize(codes + i, n - i, scale, out + i);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{Isa::kAvx2, max_abs_avx2, quantize_avx2, dequantize_avx2,
                                 dot_avx2};
  return table;
}

}  // namespace qpv::simd::detail
