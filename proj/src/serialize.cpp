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

#include "qfb/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace qfb {
namespace {

constexpr std::array<char, 4> kMagic = {'Q', 'F', 'B', 'P'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "parameter files assume a little-endian host");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError("cannot open '" + path.string() + "' for writing");
  }
  template <typename T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw FormatError("write failed for '" + path.string() + "'");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open '" + path.string() + "'");
  }
  template <typename T>
  T get() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) throw FormatError("truncated parameter file '" + path_.string() + "'");
    return value;
  }
  void raw(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (!in_) throw FormatError("truncated parameter file '" + path_.string() + "'");
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

// Guards against absurd allocations from corrupted headers.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

nlohmann::json spec_to_json(const PolicySpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"feature_map", to_string(spec.feature_map)},
          {"control_dim", spec.control_dim},
          {"n_features", spec.n_features},
          {"hidden_widths", spec.hidden_widths},
          {"horizon", spec.horizon}};
}

}  // namespace

void write_params(const std::filesystem::path& path, const PolicySpec& spec, const ParamVector& params) {
  spec.validate();
  if (static_cast<std::size_t>(params.size()) != param_count(spec)) {
    throw DimensionError("write_params: parameter count does not match the spec");
  }
  Writer w(path);
  w.raw(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.feature_map));
  w.put<std::uint64_t>(spec.control_dim);
  w.put<std::uint64_t>(spec.n_features);
  w.put<std::uint64_t>(spec.horizon);
  w.put<std::uint64_t>(spec.hidden_widths.size());
  for (std::size_t width : spec.hidden_widths) w.put<std::uint64_t>(width);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(params.size()));
  w.raw(reinterpret_cast<const char*>(params.data()), sizeof(double) * static_cast<std::size_t>(params.size()));
  w.finish(path);
}

StoredParams read_params(const std::filesystem::path& path) {
  Reader r(path);
  std::array<char, 4> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) throw FormatError("'" + path.string() + "' is not a parameter file");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("unsupported parameter file version " + std::to_string(version));
  }
  StoredParams out;
  const auto kind = r.get<std::uint32_t>();
  const auto map = r.get<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(PolicyKind::mlp)) throw FormatError("bad policy kind");
  if (map > static_cast<std::uint32_t>(FeatureMap::raw_entries)) throw FormatError("bad feature map");
  out.spec.kind = static_cast<PolicyKind>(kind);
  out.spec.feature_map = static_cast<FeatureMap>(map);
  out.spec.control_dim = r.get<std::uint64_t>();
  out.spec.n_features = r.get<std::uint64_t>();
  out.spec.horizon = r.get<std::uint64_t>();
  const auto n_hidden = r.get<std::uint64_t>();
  if (n_hidden > 1024) throw FormatError("bad hidden layer count");
  for (std::uint64_t i = 0; i < n_hidden; ++i) out.spec.hidden_widths.push_back(r.get<std::uint64_t>());
  const auto count = r.get<std::uint64_t>();
  if (count > kMaxCount) throw FormatError("bad parameter count");
  try {
    out.spec.validate();
  } catch (const DimensionError& e) {
    throw FormatError(std::string("invalid policy spec in parameter file: ") + e.what());
  }
  if (count != param_count(out.spec)) throw FormatError("parameter count does not match the stored spec");
  out.params.resize(static_cast<Eigen::Index>(count));
  r.raw(reinterpret_cast<char*>(out.params.data()), sizeof(double) * count);
  if (!r.at_end()) throw FormatError("trailing bytes in parameter file '" + path.string() + "'");
  return out;
}

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  ckpt.distribution.validate();
  std::filesystem::create_directories(dir);
  write_params(dir / "mu.bin", ckpt.spec, ckpt.distribution.mu);
  write_params(dir / "sigma.bin", ckpt.spec, ckpt.distribution.sigma);
  nlohmann::json meta = {{"format", "qfb-checkpoint"},
                         {"version", 1},
                         {"policy", spec_to_json(ckpt.spec)},
                         {"param_count", param_count(ckpt.spec)},
                         {"next_iteration", ckpt.next_iteration},
                         {"master_seed", ckpt.master_seed},
                         {"mu_file", "mu.bin"},
                         {"sigma_file", "sigma.bin"}};
  std::ofstream out(dir / "checkpoint.json", std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint in '" + dir.string() + "'");
  out << meta.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "checkpoint.json");
  if (!in) throw FormatError("no checkpoint.json in '" + dir.string() + "'");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint.json: ") + e.what());
  }
  if (meta.value("format", "") != "qfb-checkpoint") throw FormatError("not a qfb checkpoint");
  Checkpoint ckpt;
  try {
    const StoredParams mu = read_params(dir / meta.at("mu_file").get<std::string>());
    const StoredParams sigma = read_params(dir / meta.at("sigma_file").get<std::string>());
    if (!(mu.spec == sigma.spec)) throw FormatError("mu and sigma files disagree on the policy spec");
    ckpt.spec = mu.spec;
    ckpt.distribution.mu = mu.params;
    ckpt.distribution.sigma = sigma.params;
    ckpt.next_iteration = meta.at("next_iteration").get<std::size_t>();
    ckpt.master_seed = meta.at("master_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("incomplete checkpoint.json: ") + e.what());
  }
  ckpt.distribution.validate();
  return ckpt;
}

}  // namespace qfb
