// Copyright 2026 The qfeedback Authors
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

namespace qfb {

/// SplitMix64 output finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: every draw is a pure function of (key, counter),
/// so any element of a stream can be produced without replaying the prefix.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t counter) const;
  /// Standard normal via Box-Muller on the counter pair (2c, 2c+1).
  double normal(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

enum class StreamDomain : std::uint64_t {
  wiener = 1,
  initial_state = 2,
  parameters = 3,
  policy_init = 4,
  eval_wiener = 5,
  eval_initial_state = 6,
};

/// Stream index (iteration k, parameter sample p, rollout r).
struct StreamIndex {
  std::uint64_t iteration = 0;
  std::uint64_t param = 0;
  std::uint64_t rollout = 0;
};

/// All randomness in a run derives from one master seed. Distinct
/// (domain, k, p, r) tuples map to unrelated keys; within a stream the
/// counter is the time step or coordinate index.
class SeedSpec {
 public:
  SeedSpec() = default;
  explicit SeedSpec(std::uint64_t master_seed) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const { return master_seed_; }
  CounterRng stream(StreamDomain domain, const StreamIndex& index) const;

 private:
  std::uint64_t master_seed_ = 0;
};

/// Wiener increment dW ~ N(0, dt) for step `step` of stream `index`.
double sample_wiener(const SeedSpec& seed, const StreamIndex& index, std::uint64_t step,
                     double dt, StreamDomain domain = StreamDomain::wiener);

}  // namespace qfb
