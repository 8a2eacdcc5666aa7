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

#include "graphcheck/localizer.h"

#include "gmock/gmock.h"
#include "graphcheck/builder.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace graphcheck {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

DiscrepancyReport SampleReport() {
  DiscrepancyReport r;
  r.verdict = Verdict::kUnverified;
  FrontierNode f;
  f.side = GraphKind::kDistributed;
  f.id = "l0.ar";
  f.op = "all_reduce([0,1],add)";
  f.loc = SourceLoc{"mlp_tp.py", 9, "all_reduce([0,1],add)"};
  f.input_facts = {"partial(B.h, D.h, group=[0,1,2,3], op=add)"};
  r.frontier.push_back(f);
  r.consumers = {"distributed:l0.y"};
  r.summary = "layer 0: no valid relation for output l0.y";
  r.stats = {10, 8, 2, 0};
  return r;
}

TEST(RenderReportTest, Text) {
  std::string text = RenderReport(SampleReport(), ReportFormat::kText);
  EXPECT_THAT(text, HasSubstr("unverified: layer 0"));
  EXPECT_THAT(text, HasSubstr("frontier distributed l0.ar"));
  EXPECT_THAT(text, HasSubstr("mlp_tp.py:9"));
  EXPECT_THAT(text, HasSubstr("consumer distributed:l0.y"));
  EXPECT_THAT(text, HasSubstr("stats: iterations=10 facts=8"));
  DiscrepancyReport ok;
  EXPECT_EQ(RenderReport(ok, ReportFormat::kText).rfind("verified\n", 0), 0u);
}

TEST(RenderReportTest, JsonFieldsAndOrder) {
  std::string text = RenderReport(SampleReport(), ReportFormat::kJson);
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_THAT(keys, ElementsAre("verdict", "frontier", "consumers", "summary",
                                "stats"));
  EXPECT_EQ(j["verdict"], "unverified");
  EXPECT_EQ(j["frontier"][0]["line"], 9);
  EXPECT_EQ(j["frontier"][0]["side"], "distributed");
  EXPECT_EQ(RenderReport(SampleReport(), ReportFormat::kJson), text);
}

TEST(FrontierTest, UnverifiedNodesWithVerifiedInputs) {
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("x", Shape{2});
  b.Elem("a", "neg", {"x"});
  b.Elem("b", "neg", {"a"});
  b.Elem("c", "neg", {"b"});
  NodeStatus s;
  s.base_verified = {"x", "a"};
  EXPECT_THAT(Frontier(s, b.graph(), {"a", "b", "c"}), ElementsAre("b"));
  s.base_verified = {"x"};
  EXPECT_THAT(Frontier(s, b.graph(), {"a", "b", "c"}), ElementsAre("a"));
}

}  // namespace
}  // namespace graphcheck
