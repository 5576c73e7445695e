// Copyright 2026 The avsync Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace avsync {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of an independent stream addressed by (master seed, index, purpose).
// Streams are a pure function of the address, so results do not depend on
// which thread consumes them or in which order.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t purpose = 0) {
  return mix64(mix64(mix64(master) ^ index) ^ (purpose * 0xd1b54a32d192ed03ULL));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index,
                       std::uint64_t purpose = 0) {
  return Rng(stream_seed(master, index, purpose));
}

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace avsync
