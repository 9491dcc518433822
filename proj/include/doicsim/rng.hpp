// Copyright 2026 the doicsim authors
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

#include <cstdint>
#include <random>
#include <stdexcept>

namespace doicsim {

using Rng = std::mt19937_64;

// Every random quantity in a run is drawn from its own (user, purpose)
// stream so that changing one user's parameters never perturbs another
// user's sample path.
enum class StreamPurpose : std::uint64_t {
  kArrivals = 1,
  kChannel = 2,
  kCsiError = 3,
  kServiceRate = 4,
  kReplicate = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based derivation: fold each word through splitmix64 so nearby
// (seed, user, purpose) tuples land on unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t z = splitmix64(base);
  z = splitmix64(z ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
  z = splitmix64(z ^ splitmix64(b + 0x9E3779B97F4A7C15ULL));
  return z;
}

inline Rng make_stream(std::uint64_t base_seed, int user,
                       StreamPurpose purpose) {
  return Rng(derive_seed(base_seed, static_cast<std::uint64_t>(user) + 1,
                         static_cast<std::uint64_t>(purpose)));
}

inline std::uint64_t replicate_seed(std::uint64_t base_seed, int replicate) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(replicate) + 1,
                     static_cast<std::uint64_t>(StreamPurpose::kReplicate));
}

// Error raised when a hard simulation invariant trips at runtime.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Error raised for malformed or invalid configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace doicsim
