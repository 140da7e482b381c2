/*
 * Copyright 2026 The saaet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "saaet/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "saaet/matrix_io.h"

namespace saaet {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("saaet_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthIsDeterministic) {
  const CliRun a = Invoke({"synth", "--seed", "7", "--out", Path("a.txt")});
  const CliRun b = Invoke({"synth", "--seed", "7", "--out", Path("b.txt")});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(ReadFile(Path("a.txt")), ReadFile(Path("b.txt")));
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("clean_r1_tr="), std::string::npos);
}

TEST_F(CliTest, MissingRequiredFlagIsUsageError) {
  const CliRun r = Invoke({"synth", "--seed", "7"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--out"), std::string::npos);
}

TEST_F(CliTest, MissingSeedIsUsageError) {
  EXPECT_EQ(Invoke({"synth", "--out", Path("d.txt")}).code, kExitUsage);
  EXPECT_FALSE(fs::exists(Path("d.txt")));
}

TEST_F(CliTest, UnknownSubcommandAndOption) {
  EXPECT_EQ(Invoke({"bogus"}).code, kExitUsage);
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"synth", "--seed", "1", "--out", Path("x"), "--nope"}).code,
            kExitUsage);
}

TEST_F(CliTest, UnsupportedTextBudgetIsUsageError) {
  ASSERT_EQ(Invoke({"synth", "--seed", "3", "--pairs", "4", "--out",
                 Path("ds.txt"), "--models-dir", Path("models")})
                .code,
            kExitOk);
  const CliRun r = Invoke({"attack", "--seed", "3", "--dataset", Path("ds.txt"),
                        "--model", Path("models/m0.model"), "--out-dir",
                        Path("adv"), "--text-budget", "2"});
  EXPECT_EQ(r.code, kExitUsage) << r.err;
}

TEST_F(CliTest, MissingInputFileIsIoError) {
  const CliRun r = Invoke({"attack", "--seed", "3", "--dataset", Path("none.txt"),
                        "--model", Path("none.model"), "--out-dir",
                        Path("adv")});
  EXPECT_EQ(r.code, kExitIo) << r.err;
}

TEST_F(CliTest, ConfigFileOverridesAndRejectsUnknownKeys) {
  {
    std::ofstream cfg(Path("run.cfg"));
    cfg << "# small run\npairs=6\nheight=8\nwidth=8\n";
  }
  const CliRun ok = Invoke({"synth", "--seed", "2", "--config", Path("run.cfg"),
                         "--out", Path("ds.txt")});
  ASSERT_EQ(ok.code, kExitOk) << ok.err;
  const DatasetSpec spec = ReadDatasetDescriptor(Path("ds.txt"));
  EXPECT_EQ(spec.pairs, 6);
  EXPECT_EQ(spec.height, 8);
  {
    std::ofstream cfg(Path("bad.cfg"));
    cfg << "no_such_key=1\n";
  }
  EXPECT_EQ(Invoke({"synth", "--seed", "2", "--config", Path("bad.cfg"), "--out",
                 Path("ds2.txt")})
                .code,
            kExitUsage);
}

TEST_F(CliTest, AttackRoundTrip) {
  ASSERT_EQ(Invoke({"synth", "--seed", "5", "--pairs", "6", "--out",
                 Path("ds.txt"), "--models-dir", Path("models")})
                .code,
            kExitOk);
  EXPECT_TRUE(fs::exists(Path("models/base.model")));
  EXPECT_TRUE(fs::exists(Path("models/m3.model")));
  const CliRun r = Invoke({"attack", "--seed", "5", "--dataset", Path("ds.txt"),
                        "--model", Path("models/m0.model"), "--variant", "sga",
                        "--out-dir", Path("adv"), "--jobs", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("budget_violations=0"), std::string::npos) << r.out;

  const auto captions = Lines(ReadFile(Path("adv/captions.csv")));
  ASSERT_EQ(captions.size(), 7u);
  EXPECT_EQ(captions[0], "pair,original,adversarial,substituted");

  std::ifstream images(Path("adv/adv_images.txt"));
  std::size_t count = 0;
  images >> count;
  EXPECT_EQ(count, 6u);
  const ImageTensor first = ReadImage(images);
  EXPECT_EQ(first.height(), 16u);

  const auto trace = Lines(ReadFile(Path("adv/traces/pair_0005.csv")));
  ASSERT_EQ(trace.size(), 11u);
  EXPECT_EQ(trace[0], "step,loss,lambda,beta,gamma,chosen_index");

  const CliRun again = Invoke({"attack", "--seed", "5", "--dataset",
                            Path("ds.txt"), "--model",
                            Path("models/m0.model"), "--variant", "sga",
                            "--out-dir", Path("adv2")});
  ASSERT_EQ(again.code, kExitOk);
  EXPECT_EQ(ReadFile(Path("adv/adv_images.txt")),
            ReadFile(Path("adv2/adv_images.txt")));
}

TEST_F(CliTest, AttackWithProjectorFile) {
  ASSERT_EQ(Invoke({"synth", "--seed", "6", "--pairs", "4", "--out",
                 Path("ds.txt"), "--models-dir", Path("models")})
                .code,
            kExitOk);
  ASSERT_EQ(Invoke({"subspace", "--seed", "6", "--dataset", Path("ds.txt"),
                 "--model", Path("models/m1.model"), "--out", Path("p.txt")})
                .code,
            kExitOk);
  const CliRun r = Invoke({"attack", "--seed", "6", "--dataset", Path("ds.txt"),
                        "--model", Path("models/m1.model"), "--projector",
                        Path("p.txt"), "--out-dir", Path("adv")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST_F(CliTest, TransferWritesFullMatrix) {
  ASSERT_EQ(Invoke({"synth", "--seed", "8", "--pairs", "12", "--out",
                 Path("ds.txt")})
                .code,
            kExitOk);
  const CliRun r = Invoke({"transfer", "--seed", "8", "--dataset", Path("ds.txt"),
                        "--out", Path("report.csv"), "--jobs", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = Lines(ReadFile(Path("report.csv")));
  ASSERT_EQ(lines.size(), 17u);
  EXPECT_EQ(lines[0], "surrogate,target,tr_asr,ir_asr,alpha_mean,seed");
}

TEST_F(CliTest, TheoryPassesAndWritesSchema) {
  const CliRun r = Invoke({"theory", "--seed", "1", "--instances", "5", "--out",
                        Path("theory.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const auto lines = Lines(ReadFile(Path("theory.csv")));
  ASSERT_EQ(lines.size(), 50u);
  EXPECT_EQ(lines[0], "t,e_proposed,e_sga,gap");
  EXPECT_EQ(lines[1].substr(0, 2), "2,");
}

TEST_F(CliTest, TheorySgaSpecialCaseHasZeroGap) {
  const CliRun r = Invoke({"theory", "--seed", "1", "--instances", "3", "--beta",
                        "0", "--gamma", "1", "--out", Path("theory.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = Lines(ReadFile(Path("theory.csv")));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i].substr(lines[i].rfind(',') + 1), "0") << lines[i];
  }
}

TEST_F(CliTest, SubspaceFullProportionIsIdentity) {
  ASSERT_EQ(Invoke({"synth", "--seed", "9", "--pairs", "4", "--out",
                 Path("ds.txt"), "--models-dir", Path("models")})
                .code,
            kExitOk);
  const CliRun r = Invoke({"subspace", "--seed", "9", "--dataset", Path("ds.txt"),
                        "--model", Path("models/m0.model"), "--proportion",
                        "1.0", "--out", Path("p.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("rank=32"), std::string::npos) << r.out;
  const ProjectionBasis pb = ReadProjector(Path("p.txt"));
  EXPECT_LT((pb.projector() - Eigen::MatrixXd::Identity(32, 32))
                .cwiseAbs()
                .maxCoeff(),
            1e-9);
}

TEST_F(CliTest, SubspaceDefaultProportionIsIdempotent) {
  ASSERT_EQ(Invoke({"synth", "--seed", "9", "--pairs", "4", "--out",
                 Path("ds.txt")})
                .code,
            kExitOk);
  const CliRun r = Invoke({"subspace", "--seed", "9", "--dataset", Path("ds.txt"),
                        "--out", Path("p.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const ProjectionBasis pb = ReadProjector(Path("p.txt"));
  const Eigen::MatrixXd& P = pb.projector();
  EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-9);
}

}  // namespace
}  // namespace saaet
