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
#include <string_view>

// Data-parallel inner loops of the quantizer and the simulated scorer.
//
// Every ISA variant must produce bit-identical output to the scalar reference:
// reductions are either order-free (max) or follow a fixed 4-lane order (dot),
// rounding is explicit half-away-from-zero, and no multiply-add is fused.
namespace qpv::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  double (*max_abs)(const double* x, std::size_t n);
  // codes[i] = clamp(round_half_away(x[i] / scale), qmin, qmax)
  void (*quantize)(const double* x, std::size_t n, double scale, std::int32_t qmin,
                   std::int32_t qmax, std::int32_t* codes);
  // out[i] = codes[i] * scale
  void (*dequantize)(const std::int32_t* codes, std::size_t n, double scale, double* out);
  // Lane j sums products at indices i = j (mod 4) over whole blocks, lanes are
  // combined as (l0 + l1) + (l2 + l3), then the tail is added in order.
  double (*dot)(const double* a, const double* b, std::size_t n);
};

bool isa_available(Isa isa) noexcept;

// Throws qpv::Error(kInvalidArgument) when `isa` is not available on this host.
const KernelTable& kernel_table(Isa isa);

// Best ISA this host supports, unless QPVOTE_FORCE_ISA=scalar|avx2|neon says otherwise.
Isa active_isa() noexcept;
void set_active_isa(Isa isa);

const KernelTable& active_kernels() noexcept;

inline double max_abs(std::span<const double> x) {
  return active_kernels().max_abs(x.data(), x.size());
}

inline void quantize(std::span<const double> x, double scale, std::int32_t qmin,
                     std::int32_t qmax, std::span<std::int32_t> codes) {
  active_kernels().quantize(x.data(), x.size(), scale, qmin, qmax, codes.data());
}

inline void dequantize(std::span<const std::int32_t> codes, double scale, std::span<double> out) {
  active_kernels().dequantize(codes.data(), codes.size(), scale, out.data());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

}  // namespace qpv::simd
