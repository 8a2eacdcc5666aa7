/* Copyright 2026 The Graphcheck Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "absl/strings/str_cat.h"
#include "gmock/gmock.h"
#include "graphcheck/graph_io.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

using ::testing::HasSubstr;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::path(::testing::TempDir()) / "graphcheck_cli";
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }

  int Run(const std::string& args) {
    std::string cmd = absl::StrCat(GRAPHCHECK_CLI, " ", args, " >",
                                   (dir_ / "stdout").string(), " 2>",
                                   (dir_ / "stderr").string());
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Read(const std::string& name) {
    absl::StatusOr<std::string> s = ReadFile((dir_ / name).string());
    return s.ok() ? *s : "";
  }

  std::string PairArgs(const std::string& sub) {
    std::string d = (dir_ / sub).string();
    return absl::StrCat("--baseline ", d, "/baseline.json --distributed ", d,
                        "/distributed.json --annotations ", d,
                        "/annotations.json");
  }

  std::filesystem::path dir_;
};

TEST_F(CliTest, GenVerifyInject) {
  ASSERT_EQ(Run(absl::StrCat("gen --model mlp --strategy tp --degree 2 --out ",
                             (dir_ / "ok").string())),
            0);
  EXPECT_EQ(Run("verify " + PairArgs("ok")), 0);
  EXPECT_THAT(Read("stdout"), HasSubstr("verified"));

  ASSERT_EQ(Run(absl::StrCat("inject ", PairArgs("ok"), " --category 2 --out ",
                             (dir_ / "bug").string())),
            0);
  const std::string report = (dir_ / "report.json").string();
  EXPECT_EQ(Run(absl::StrCat("verify ", PairArgs("bug"),
                             " --format json --report ", report)),
            1);
  EXPECT_THAT(Read("report.json"), HasSubstr("\"frontier\""));
  EXPECT_THAT(Read("report.json"), HasSubstr("l0.ar"));
}

TEST_F(CliTest, ReportsAreByteIdenticalAcrossJobCounts) {
  ASSERT_EQ(Run(absl::StrCat("gen --model attention --strategy sp --degree 2 "
                             "--hidden 16 --heads 4 --out ",
                             (dir_ / "a").string())),
            0);
  for (const char* jobs : {"1", "8"}) {
    EXPECT_EQ(Run(absl::StrCat("verify ", PairArgs("a"), " --jobs ", jobs,
                               " --report ", (dir_ / "r").string(), jobs,
                               " --dump-facts ", (dir_ / "f").string(), jobs)),
              0);
  }
  EXPECT_EQ(Read("r1"), Read("r8"));
  EXPECT_EQ(Read("f1"), Read("f8"));
  EXPECT_FALSE(Read("f1").empty());
}

TEST_F(CliTest, MissingAnnotationFileIsAnIoError) {
  ASSERT_EQ(Run(absl::StrCat("gen --out ", (dir_ / "ok").string())), 0);
  std::filesystem::remove(dir_ / "ok" / "annotations.json");
  EXPECT_EQ(Run("verify " + PairArgs("ok")), 3);
  EXPECT_FALSE(Read("stderr").empty());
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Run("verify --baseline x"), 3);
  EXPECT_EQ(Run("frobnicate"), 3);
  EXPECT_EQ(Run("explain-rules X0-none"), 3);
  EXPECT_EQ(Run("explain-rules P1-elem-sharded"), 0);
  EXPECT_THAT(Read("stdout"), HasSubstr("P1-elem-sharded (Partition)"));
}

TEST_F(CliTest, TightBudgetIsInconclusive) {
  ASSERT_EQ(Run(absl::StrCat("gen --out ", (dir_ / "ok").string())), 0);
  EXPECT_EQ(Run("verify --max-iterations 1 " + PairArgs("ok")), 2);
}

}  // namespace
}  // namespace graphcheck
