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

#include <cmath>
#include <cstdint>
#include <string_view>

namespace qpv::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

template <typename... Rest>
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return hash_combine(hash_combine(a, b), rest...);
}

// Uniform in [0, 1) with 53 random bits.
inline double unit_from_hash(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Irwin-Hall approximation of a standard normal. Pure +,-,*,sqrt, so it is
// bit-reproducible across platforms (unlike log/cos based Box-Muller).
inline double normal_from_hash(std::uint64_t h) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    h = splitmix64(h);
    s += unit_from_hash(h);
  }
  return (s - 2.0) * std::sqrt(3.0);
}

}  // namespace qpv::detail
