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

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "qpvote/error.hpp"

namespace qpv::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(QPVOTE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(QPVOTE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernel_table(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel ISA " + std::string(to_string(isa)) + " not available on this host");
  }
  switch (isa) {
#if defined(QPVOTE_HAVE_AVX2)
    case Isa::kAvx2: return detail::avx2_table();
#endif
#if defined(QPVOTE_HAVE_NEON)
    case Isa::kNeon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

namespace {

Isa detect() noexcept {
  if (const char* forced = std::getenv("QPVOTE_FORCE_ISA")) {
    const std::string_view f(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (f == to_string(isa) && isa_available(isa)) return isa;
    }
  }
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{&kernel_table(detect())};
  return slot;
}

}  // namespace

const KernelTable& active_kernels() noexcept { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active_kernels().isa; }

void set_active_isa(Isa isa) { active_slot().store(&kernel_table(isa), std::memory_order_release); }

}  // namespace qpv::simd
