// Copyright 2026 The liqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace liqa::detail {

// std <random> distributions are implementation-defined; these helpers keep
// seeded runs bitwise reproducible across standard libraries.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline bool coin_flip(std::mt19937_64& g) { return (g() & 1ull) != 0; }

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline double log_uniform(std::mt19937_64& g, double lo, double hi) {
  return std::exp(uniform_range(g, std::log(lo), std::log(hi)));
}

/// Uniform integer in [0, n), by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t r;
  do {
    r = g();
  } while (r >= limit);
  return r % n;
}

}  // namespace liqa::detail
