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

#include "qfb/rng.hpp"

#include <cmath>
#include <numbers>

namespace qfb {

double CounterRng::uniform(std::uint64_t counter) const {
  // (bits >> 11 + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng SeedSpec::stream(StreamDomain domain, const StreamIndex& index) const {
  std::uint64_t h = mix64(master_seed_ ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(domain));
  h = mix64(h ^ mix64(index.iteration + 0x243f6a8885a308d3ULL));
  h = mix64(h ^ mix64(index.param + 0x13198a2e03707344ULL));
  h = mix64(h ^ mix64(index.rollout + 0xa4093822299f31d0ULL));
  return CounterRng(h);
}

double sample_wiener(const SeedSpec& seed, const StreamIndex& index, std::uint64_t step,
                     double dt, StreamDomain domain) {
  return std::sqrt(dt) * seed.stream(domain, index).normal(step);
}

}  // namespace qfb
