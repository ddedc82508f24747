// Copyright 2026 The tae Authors
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

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "tae/checkpoint.hpp"
#include "tae/schedule.hpp"
#include "tae/tfrm.hpp"

namespace tae {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome tae_run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"tae"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("tae_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string path(const std::string& name) const { return (root_ / name).string(); }

  // Three 8x8 days and a tiny model config, so training takes seconds.
  void small_city() {
    ASSERT_EQ(tae_run({"synth", "--seed", "4", "--height", "8", "--width", "8", "--days", "3",
                       "--out", path("city")}).code, cli::kSuccess);
    std::ofstream(path("small.cfg")) << "hidden_channels = 2,2,2,2,2,2\n"
                                        "height = 8\nwidth = 8\nepochs = 2\ncycles = 1\n"
                                        "batch_size = 8\n";
  }

  fs::path root_;
};

TEST_F(CliTest, SynthIsDeterministic) {
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(tae_run({"synth", "--seed", "11", "--days", "2", "--drift", "--out", path(name)}).code,
              cli::kSuccess);
  }
  for (const char* f : {"meta.json", "day_0000.tfrm", "day_0001.tfrm"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
  const ByteTensor day = load_tfrm_u8(root_ / "a" / "day_0000.tfrm");
  EXPECT_EQ(day.shape(), (Shape{288, 16, 16, 9}));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(tae_run({"synth", "--days", "0", "--out", path("x")}).code, cli::kUsageError);
  EXPECT_EQ(tae_run({"synth", "--bogus", "--out", path("x")}).code, cli::kUsageError);
  EXPECT_EQ(tae_run({}).code, cli::kUsageError);
  EXPECT_EQ(tae_run({"eval", "--data", path("nowhere"), "--checkpoint", path("c")}).code,
            cli::kUsageError);
  EXPECT_EQ(tae_run({"--help"}).code, cli::kSuccess);
}

TEST_F(CliTest, GradcheckExitCodes) {
  const Outcome ok = tae_run({"gradcheck", "--model-samples", "20"});
  EXPECT_EQ(ok.code, cli::kSuccess) << ok.out;
  EXPECT_NE(ok.out.find("temporal_autoencoder"), std::string::npos);
  EXPECT_EQ(tae_run({"gradcheck", "--model-samples", "20", "--inject-fault", "conv-sign"}).code,
            cli::kVerificationFailure);
  EXPECT_EQ(tae_run({"gradcheck", "--model-samples", "20", "--tolerance", "0"}).code,
            cli::kVerificationFailure);
}

TEST_F(CliTest, ScheduleDumpMatchesLibrary) {
  const Outcome r = tae_run({"schedule-dump", "--mode", "triangular2", "--epochs", "4",
                             "--cycles", "2", "--batches-per-epoch", "3"});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "iteration,lr");
  ClrSchedule s;
  s.mode = ClrMode::triangular2;
  s.step_size = 3;
  std::uint64_t rows = 0;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    EXPECT_EQ(std::stoull(line.substr(0, comma)), rows);
    EXPECT_EQ(std::stod(line.substr(comma + 1)), clr(rows, s)) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 12u);
}

TEST_F(CliTest, ZeroLearningRateKeepsInitialWeights) {
  small_city();
  const Outcome r = tae_run({"train", "--data", path("city"), "--config", path("small.cfg"),
                             "--fixed-lr", "0", "--model-seed", "3", "--out", path("ckpt"),
                             "--quiet"});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const TemporalAutoencoder trained = load_checkpoint(root_ / "ckpt");
  const TemporalAutoencoder init = build_model(trained.config, 3);
  const auto a = trained.parameters(), b = init.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i].tensor, *b[i].tensor) << a[i].name;
}

TEST_F(CliTest, TrainEvalPredictPipeline) {
  small_city();
  const std::string city = path("city");
  for (const char* run : {"log1.csv", "log2.csv"}) {
    ASSERT_EQ(tae_run({"train", "--data", city, "--config", path("small.cfg"), "--out",
                       path("ckpt"), "--log", path(run), "--quiet"}).code,
              cli::kSuccess);
  }
  EXPECT_EQ(slurp(path("log1.csv")), slurp(path("log2.csv")));
  EXPECT_EQ(slurp(path("log1.csv")).rfind("epoch,iteration,lr,train_mse,val_mse\n", 0), 0u);

  ASSERT_EQ(tae_run({"mask", "--data", city, "--out", path("mask.tfrm")}).code, cli::kSuccess);
  ASSERT_EQ(tae_run({"eval", "--data", city, "--checkpoint", path("ckpt"), "--city", "toy",
                     "--out", path("eval.csv")}).code, cli::kSuccess);
  ASSERT_EQ(tae_run({"eval", "--data", city, "--checkpoint", path("ckpt"), "--city", "toy",
                     "--mask", path("mask.tfrm"), "--out", path("eval.csv"), "--append"}).code,
            cli::kSuccess);
  std::istringstream report(slurp(path("eval.csv")));
  std::string header, plain, masked;
  std::getline(report, header);
  std::getline(report, plain);
  std::getline(report, masked);
  EXPECT_EQ(header, "city,config,masked,val_mse");
  ASSERT_EQ(plain.rfind("toy,final,no,", 0), 0u);
  ASSERT_EQ(masked.rfind("toy,final,yes,", 0), 0u);
  EXPECT_LE(std::stod(masked.substr(14)), std::stod(plain.substr(13)));

  ASSERT_EQ(tae_run({"predict", "--data", city, "--checkpoint", path("ckpt"), "--out",
                     path("pred"), "--select-6"}).code, cli::kSuccess);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(root_ / "pred")) {
    EXPECT_EQ(load_tfrm_u8(e.path()).shape(), (Shape{6, 8, 8, 8}));
    ++files;
  }
  EXPECT_EQ(files, 12u);

  EXPECT_EQ(tae_run({"eval", "--data", city, "--checkpoint", path("missing")}).code,
            cli::kUsageError);
}

}  // namespace
}  // namespace tae
