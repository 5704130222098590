// Copyright 2025 The SGIS Authors
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

#ifndef SGIS_RNG_HPP
#define SGIS_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sgis {

/// splitmix64 finalizer; full-avalanche mix of one 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, tags...). Every random
/// draw in the project goes through an engine seeded this way, keyed by the
/// index of the item being generated, so results do not depend on thread
/// scheduling or evaluation order.
inline std::uint64_t sub_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x853C49E6748FEA9BULL;
  for (std::uint64_t p : parts) {
    h = mix64(h ^ p);
  }
  return h;
}

/// Engine for one indexed work item.
inline std::mt19937_64 make_engine(std::initializer_list<std::uint64_t> parts) {
  return std::mt19937_64(sub_seed(parts));
}

}  // namespace sgis

#endif  // SGIS_RNG_HPP
