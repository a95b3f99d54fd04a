// Copyright 2026 The asvvote Authors.
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

// Seed derivation.  Every random stream in the testbed is keyed by
// (global seed, tag, index) so that streams never collide and results do
// not depend on evaluation order.

#ifndef ASVVOTE_RNG_HPP_
#define ASVVOTE_RNG_HPP_

#include <cstdint>
#include <span>
#include <string_view>

namespace asvvote {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(base ^ fnv1a64(tag)) + index);
}

// hash(global_seed, trial_id, purpose), e.g. purpose "defense" or "attack".
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view key,
                                    std::string_view purpose) {
  return splitmix64(splitmix64(base ^ fnv1a64(key)) ^ fnv1a64(purpose));
}

}  // namespace asvvote

#endif  // ASVVOTE_RNG_HPP_
