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
#include <filesystem>
#include <string>

#include "qfb/gass.hpp"
#include "qfb/policy.hpp"

namespace qfb {

/// Thrown for unreadable, truncated or incompatible files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary parameter file, little endian:
///   "QFBP" | u32 version | u32 kind | u32 feature_map | u64 control_dim
///   | u64 n_features | u64 horizon | u64 n_hidden | u64 widths[n_hidden]
///   | u64 count | f64 values[count]
void write_params(const std::filesystem::path& path, const PolicySpec& spec, const ParamVector& params);

struct StoredParams {
  PolicySpec spec;
  ParamVector params;
};

StoredParams read_params(const std::filesystem::path& path);

/// Optimizer state sufficient to resume a run. `sigma` is the unannealed
/// base deviation; annealing is recomputed from the iteration index.
struct Checkpoint {
  PolicySpec spec;
  SamplingDistribution distribution;
  std::size_t next_iteration = 0;
  std::uint64_t master_seed = 0;
};

/// Writes checkpoint.json, mu.bin and sigma.bin into `dir` (created if needed).
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace qfb
