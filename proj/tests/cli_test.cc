// Copyright 2026 The degradekit Authors
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

// Runs the command-line tool as a subprocess.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "degradekit/degrade.h"
#include "degradekit/harness.h"
#include "degradekit/image.h"
#include "degradekit/sweep.h"
#include "degradekit/synthetic.h"
#include "json.hpp"

namespace degradekit {
namespace {

namespace fs = std::filesystem;

const std::string kCli = DEGRADEKIT_CLI;
const std::string kData = DEGRADEKIT_TEST_DATA;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome Cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  Outcome o;
  if (!pipe) return o;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dk_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Cli("").code, 1);
  EXPECT_EQ(Cli("frobnicate").code, 1);
  EXPECT_EQ(Cli("degrade --input x.png").code, 1);
  EXPECT_EQ(Cli("degrade --input x.png --output y.png --kernel 1,2").code, 1);
  EXPECT_EQ(Cli("degrade --input x.png --output y.png --jpeg 0").code, 1);
  EXPECT_EQ(Cli("--help").code, 0);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  EXPECT_EQ(Cli("degrade --input /nonexistent.png --output " + Path("o.png")).code, 2);
  EXPECT_EQ(Cli("report --run " + Path("none") + " --manifest " + Path("none.json")).code,
            2);
}

TEST_F(CliTest, DegradeMatchesLibrary) {
  const std::string in = kData + "/gradient_112.png";
  const Outcome o = Cli("degrade --input " + in + " --output " + Path("o.png") +
                        " --gamma 2 --kernel 1,3,pi/4 --scale 4 --noise 8"
                        " --jpeg 32 --seed 11");
  ASSERT_EQ(o.code, 0) << o.out;
  DegradationParams p;
  p.exposure_gamma = 2.0;
  p.kernel = KernelParams{1, 3, std::numbers::pi / 4};
  p.downscale_ratio = 4;
  p.noise_sigma = 8.0;
  p.jpeg_quality = 32;
  EXPECT_EQ(ReadPng(Path("o.png")), Degrade(ReadPng(in), p, 11, 112));
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j.at("seed"), 11);
  EXPECT_EQ(j.at("jpeg_quality"), 32);

  // No stage flags: the image passes through unchanged.
  ASSERT_EQ(Cli("degrade --input " + in + " --output " + Path("id.png")).code, 0);
  EXPECT_EQ(ReadPng(Path("id.png")), ReadPng(in));
}

TEST_F(CliTest, PlanPrintsGridCounts) {
  const Outcome o = Cli("plan --grid study --output " + Path("m.json"));
  ASSERT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("combinations: 11760"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("retained (<= 1 extreme): 9070"), std::string::npos);
  EXPECT_NE(o.out.find("runs: 52080"), std::string::npos);
  const SweepManifest m = ParseManifest(ReadTextFile(Path("m.json")));
  EXPECT_NE(o.out.find(ManifestHash(m)), std::string::npos);
}

TEST_F(CliTest, RunAndReport) {
  SyntheticOptions opts;
  WriteFileAtomic(Path("pairs.txt"), MakeSyntheticPairs(opts).FormatLfw());
  ASSERT_EQ(Cli("plan --grid mini --seed 3 --output " + Path("m.json")).code, 0);
  const std::string common = " --manifest " + Path("m.json") + " --pairs " +
                             Path("pairs.txt") + " --run-dir " + Path("run") +
                             " --provider random --quiet";
  const Outcome first = Cli("run" + common + " --max-combinations 10");
  ASSERT_EQ(first.code, 0);
  EXPECT_NE(first.out.find("10/32"), std::string::npos) << first.out;
  EXPECT_EQ(Cli("report --run " + Path("run") + " --manifest " + Path("m.json")).code,
            2);
  const Outcome second = Cli("run" + common + " --jobs 2");
  ASSERT_EQ(second.code, 0);
  EXPECT_NE(second.out.find("resumed: 32/32"), std::string::npos) << second.out;
  ASSERT_EQ(Cli("report --run " + Path("run") + " --manifest " + Path("m.json")).code,
            0);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "series.csv"));

  // Changed provider settings on the same directory.
  EXPECT_EQ(Cli("run" + common + " --random-salt 4").code, 2);
}

TEST_F(CliTest, RemoteFailureExitsThree) {
  SyntheticOptions opts;
  opts.image_size = 32;
  WriteSyntheticDataset(opts, dir_ / "data");
  ASSERT_EQ(Cli("plan --grid mini --output " + Path("m.json")).code, 0);
  const Outcome o =
      Cli("run --manifest " + Path("m.json") + " --pairs " + Path("data/pairs.txt") +
          " --images " + Path("data/images") + " --run-dir " + Path("run") +
          " --provider remote --endpoint http://127.0.0.1:1/embed --timeout 0.5"
          " --retries 0 --quiet");
  EXPECT_EQ(o.code, 3);
}

}  // namespace
}  // namespace degradekit
