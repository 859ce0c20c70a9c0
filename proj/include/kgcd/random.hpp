// Copyright 2026 The kgcd Authors.
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

// Seeding and sampling helpers. The standard distributions are
// implementation-defined, so every draw goes through the raw 64-bit engine
// output to keep results identical across toolchains.

#ifndef KGCD_RANDOM_HPP_
#define KGCD_RANDOM_HPP_

#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

namespace kgcd {

using Engine = std::mt19937_64;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-seed: stages draw from independent streams of one top-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  return mix64(seed ^ fnv1a64(stage));
}

inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n) for n > 0.
inline std::size_t uniform_index(Engine& rng, std::size_t n) {
  auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  return order;
}

}  // namespace kgcd

#endif  // KGCD_RANDOM_HPP_
