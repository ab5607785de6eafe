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

#include <arm_neon.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace qpv::simd::detail {
namespace {

double max_abs_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

inline float64x2_t round_half_away(float64x2_t v) {
  const float64x2_t t = vrndq_f64(v);
  const float64x2_t frac = vsubq_f64(v, t);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t up = vbslq_f64(vcgeq_f64(frac, vdupq_n_f64(0.5)), one, zero);
  const float64x2_t dn = vbslq_f64(vcleq_f64(frac, vdupq_n_f64(-0.5)), one, zero);
  return vsubq_f64(vaddq_f64(t, up), dn);
}

void quantize_neon(const double* x, std::size_t n, double scale, std::int32_t qmin,
                   std::int32_t qmax, std::int32_t* codes) {
  const float64x2_t vs = vdupq_n_f64(scale);
  const float64x2_t lo = vdupq_n_f64(static_cast<double>(qmin));
  const float64x2_t hi = vdupq_n_f64(static_cast<double>(qmax));
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t q = round_half_away(vdivq_f64(vld1q_f64(x + i), vs));
    q = vminq_f64(vmaxq_f64(q, lo), hi);
    vst1_s32(codes + i, vmovn_s64(vcvtq_s64_f64(q)));
  }
  if (i < n) scalar_table().quantize(x + i, n - i, scale, qmin, qmax, codes + i);
}

void dequantize_neon(const std::int32_t* codes, std::size_t n, double scale, double* out) {
  const float64x2_t vs = vdupq_n_f64(scale);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t c = vcvtq_f64_s64(vmovl_s32(vld1_s32(codes + i)));
    vst1q_f64(out + i, vmulq_f64(c, vs));
  }
  if (i < n) scalar_table().dequantize(codes + i, n - i, scale, out + i);
}

// Two 2-lane accumulators reproduce the 4-lane order of the scalar reference.
double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double sum = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
               (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
  for (std::size_t i = n4; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

}  // namespace

const KernelTable& neon_table() noexcept {
  static const KernelTable table{Isa::kNeon, max_abs_neon, quantize_neon, dequantize_neon,
                                 dot_neon};
  return table;
}

}  // namespace qpv::simd::detail
