// Copyright 2026 The ftfsim Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "util.hpp"

namespace fs = std::filesystem;

#ifdef FTF_CLI_PATH

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ftf_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(FTF_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
  }
  std::string cfg() const { return "--config " + testing_util::unit_config_path(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("spectrum --no-such-flag").code, 2);
  EXPECT_EQ(run("--version").code, 0);
}

TEST_F(Cli, InputErrorsReportJson) {
  const auto o = run("spectrum --out " + (dir_ / "a").string());
  EXPECT_EQ(o.code, 3);
  const auto missing = run("spectrum --config /nonexistent.cfg --out " + (dir_ / "b").string());
  EXPECT_EQ(missing.code, 3);
  const auto j = nlohmann::json::parse(missing.err.substr(missing.err.find('{')));
  EXPECT_EQ(j.at("exit_code"), 3);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "b" / "manifest.json")).at("status"), "failed");
}

TEST_F(Cli, SpectrumWritesOutputsAndManifest) {
  const fs::path out = dir_ / "spec";
  ASSERT_EQ(run("spectrum " + cfg() + " --subsystem Q2,C23,Q3 --levels Q2=4,C23=3,Q3=4 --flux C23=0.5 --out " + out.string()).code, 0);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m.at("status"), "ok");
  EXPECT_EQ(m.at("command"), "spectrum");
  const auto s = nlohmann::json::parse(slurp(out / "spectrum.json"));
  EXPECT_EQ(s.at("states").size(), 48u);
  EXPECT_EQ(s.at("states")[0].at("label"), "ggg");
  EXPECT_TRUE(fs::exists(out / "spectrum.csv"));
}

TEST_F(Cli, SetOverridesChangeTheDevice) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(run("spectrum " + cfg() + " --subsystem Q2 --out " + a.string()).code, 0);
  ASSERT_EQ(run("spectrum " + cfg() + " --subsystem Q2 --set Q2.e_l=0.7 --out " + b.string()).code, 0);
  EXPECT_NE(slurp(a / "spectrum.json"), slurp(b / "spectrum.json"));
}

TEST_F(Cli, SeededRunsAreReproducibleAcrossThreads) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  const std::string args = "ghz " + cfg() + " --n 6 --shots 20000 --seed 9 ";
  ASSERT_EQ(run(args + "--threads 1 --out " + a.string()).code, 0);
  ASSERT_EQ(run(args + "--threads 3 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "ghz_record.bin"), slurp(b / "ghz_record.bin"));
  EXPECT_EQ(slurp(a / "ghz.json"), slurp(b / "ghz.json"));
}

TEST_F(Cli, MitigateRoundTrip) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(run("ghz " + cfg() + " --n 3 --shots 50000 --seed 2 --noise none --out " + a.string()).code, 0);
  ASSERT_EQ(run("mitigate --record " + (a / "ghz_record.bin").string() +
                " --p-ge 0.05 --p-eg 0.05 --corrupt --seed 4 --out " + b.string()).code, 0);
  const auto m = nlohmann::json::parse(slurp(b / "mitigate.json"));
  const auto truth = m.at("truth").get<std::vector<double>>();
  const auto measured = m.at("measured").get<std::vector<double>>();
  double tv_raw = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) tv_raw += 0.5 * std::abs(truth[i] - measured[i]);
  EXPECT_GT(tv_raw, 0.05);
  EXPECT_LT(m.at("tv_to_truth").get<double>(), 0.01);
}

#endif
