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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "temp_dir.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(QFB_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_smoke_config(const qfb::testing::TempDir& dir, const std::string& name) {
  const json doc = {{"gass", {{"iterations", 1}, {"param_samples", 2}, {"rollouts", 1}, {"master_seed", 5}}},
                    {"sim", {{"n_steps", 10}, {"n_eval_trajectories", 4}}},
                    {"output_dir", (dir / name).string()}};
  const fs::path path = dir / (name + ".json");
  std::ofstream(path) << doc.dump(2);
  return path;
}

TEST(Cli, TrainSmokeRun) {
  qfb::testing::TempDir dir;
  const fs::path cfg = write_smoke_config(dir, "run");
  ASSERT_EQ(run_cli("train -c " + cfg.string(), dir / "log.txt"), 0) << slurp(dir / "log.txt");
  const std::string csv = slurp(dir / "run" / "train_stats.csv");
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, 10), "iteration,");
  EXPECT_TRUE(fs::exists(dir / "run" / "checkpoint" / "checkpoint.json"));
}

TEST(Cli, TrainTwiceIsByteIdentical) {
  qfb::testing::TempDir dir;
  const fs::path a = write_smoke_config(dir, "a");
  const fs::path b = write_smoke_config(dir, "b");
  const std::string more = " --set gass.iterations=3 --set gass.param_samples=4 --set gass.rollouts=2";
  ASSERT_EQ(run_cli("train -c " + a.string() + more, dir / "la.txt"), 0) << slurp(dir / "la.txt");
  ASSERT_EQ(run_cli("train -c " + b.string() + more, dir / "lb.txt"), 0) << slurp(dir / "lb.txt");
  EXPECT_EQ(slurp(dir / "a" / "train_stats.csv"), slurp(dir / "b" / "train_stats.csv"));
  for (const char* f : {"checkpoint.json", "mu.bin", "sigma.bin"}) {
    EXPECT_EQ(slurp(dir / "a" / "checkpoint" / f), slurp(dir / "b" / "checkpoint" / f)) << f;
  }
}

TEST(Cli, EvalCompareAndDegeneracy) {
  qfb::testing::TempDir dir;
  const fs::path cfg = write_smoke_config(dir, "run");
  ASSERT_EQ(run_cli("train -c " + cfg.string(), dir / "log.txt"), 0);
  ASSERT_EQ(run_cli("eval -c " + cfg.string() + " --n-traj 3 --horizon 25", dir / "log.txt"), 0)
      << slurp(dir / "log.txt");
  EXPECT_EQ(json::parse(slurp(dir / "run" / "eval_summary.json"))["n_steps"], 25);
  ASSERT_EQ(run_cli("eval -c " + cfg.string() + " --baseline", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  EXPECT_EQ(json::parse(slurp(dir / "run" / "eval_summary.json"))["controller"], "baseline");
  ASSERT_EQ(run_cli("compare -c " + cfg.string() + " --gain-fidelity 1.5,2.5", dir / "log.txt"), 0)
      << slurp(dir / "log.txt");
  const json report = json::parse(slurp(dir / "run" / "compare.json"));
  EXPECT_EQ(report["baseline"]["gain_fidelity"], json({1.5, 2.5}));
  ASSERT_EQ(run_cli("degeneracy -c " + cfg.string(), dir / "log.txt"), 0);
  EXPECT_TRUE(json::parse(slurp(dir / "run" / "degeneracy.json"))["states"][0]["is_degenerate"].get<bool>());
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  qfb::testing::TempDir dir;
  const fs::path cfg = write_smoke_config(dir, "run");
  EXPECT_EQ(run_cli("train -c " + cfg.string() + " --set gass.bogus=1", dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("train -c " + (dir / "missing.json").string(), dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("train -c " + cfg.string() + " --set system.eta=2", dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("frobnicate", dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("compare -c " + cfg.string() + " --gain-fidelity x", dir / "log.txt"), 2);
  // No checkpoint has been written yet.
  EXPECT_EQ(run_cli("eval -c " + cfg.string(), dir / "log.txt"), 2);
  ASSERT_EQ(run_cli("train -c " + cfg.string(), dir / "log.txt"), 0);
  EXPECT_EQ(run_cli("eval -c " + cfg.string() + " --set policy.kind=mlp --set policy.hidden_widths=[2]",
                    dir / "log.txt"),
            2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
  qfb::testing::TempDir dir;
  const fs::path cfg = write_smoke_config(dir, "run");
  EXPECT_EQ(run_cli("train -c " + cfg.string() + " --set gass.sigma=1e308", dir / "log.txt"), 3)
      << slurp(dir / "log.txt");
}

}  // namespace
