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

#include "graphcheck/rules.h"

#include <set>

#include "gmock/gmock.h"
#include "graphcheck/driver.h"
#include "graphcheck/synth.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

using ::testing::Contains;
using ::testing::HasSubstr;
using ::testing::Not;

TEST(ParallelismFlagsTest, Parse) {
  absl::StatusOr<ParallelismFlags> f = ParseParallelismFlags("tp,sp");
  ASSERT_TRUE(f.ok());
  EXPECT_TRUE(f->tp && f->sp && !f->ep);
  EXPECT_EQ(f->ToString(), "tp,sp");
  f = ParseParallelismFlags("all");
  ASSERT_TRUE(f.ok());
  EXPECT_EQ(f->ToString(), "tp,sp,ep");
  EXPECT_FALSE(ParseParallelismFlags("pp").ok());
  EXPECT_FALSE(ParseParallelismFlags("").ok());
}

TEST(RuleCatalogTest, IdsAreUniqueAndExplained) {
  std::set<std::string> ids;
  for (const Rule& r : AllRules()) {
    EXPECT_TRUE(ids.insert(r.id).second) << r.id;
    EXPECT_FALSE(r.head.empty()) << r.id;
    EXPECT_TRUE(r.on_node || r.on_fact) << r.id;
    absl::StatusOr<std::string> text = ExplainRule(r.id);
    ASSERT_TRUE(text.ok()) << r.id;
    EXPECT_THAT(*text, HasSubstr("then: "));
  }
  EXPECT_EQ(ExplainRule("nope").status().code(), absl::StatusCode::kNotFound);
}

TEST(RuleCatalogTest, FormsSelectRules) {
  ParallelismFlags tp_only{true, false, false};
  std::vector<std::string> tp = DefaultCatalog(tp_only).Ids();
  EXPECT_THAT(tp, Contains("L6-allreduce-discharge"));
  EXPECT_THAT(tp, Not(Contains("L7-reducescatter-discharge")));
  EXPECT_THAT(tp, Not(Contains("U12-loopredB-init")));
  EXPECT_THAT(tp, Contains("C-dup-congruence"));
  EXPECT_EQ(DefaultCatalog({}).Ids().size(), AllRules().size());
}

TEST(RuleCatalogTest, CatalogFile) {
  absl::StatusOr<RuleCatalog> c = ParseCatalogFile(
      "# partition rules\nP1-elem-sharded\n\n  P2-dot-partial  # dots\n");
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_THAT(c->Ids(),
              ::testing::ElementsAre("P1-elem-sharded", "P2-dot-partial"));
  EXPECT_EQ(ParseCatalogFile("X9-unknown\n").status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_NE(c->Find("P2-dot-partial"), nullptr);
  EXPECT_EQ(c->Find("L3-dot-layout"), nullptr);
}

VerificationOutcome VerifyWith(const ModelPair& p, const RuleCatalog& c) {
  return VerifyPair(p.base, p.dist, p.ann, c, VerifyOptions{});
}

// Removing the rules of a form loses exactly the pairs that need them.
TEST(RuleCatalogTest, FormAblation) {
  ModelSpec spec;
  absl::StatusOr<ModelPair> sp = Parallelize(spec, {Strategy::kSp, 2});
  absl::StatusOr<ModelPair> tp = Parallelize(spec, {Strategy::kTp, 2});
  ASSERT_TRUE(sp.ok() && tp.ok());
  RuleCatalog tp_rules = DefaultCatalog({true, false, false});
  EXPECT_EQ(VerifyWith(*tp, tp_rules).verdict, Verdict::kVerified);
  EXPECT_EQ(VerifyWith(*sp, tp_rules).verdict, Verdict::kUnverified);
  EXPECT_EQ(VerifyWith(*sp, DefaultCatalog({})).verdict, Verdict::kVerified);

  spec.kind = ModelKind::kMoe;
  absl::StatusOr<ModelPair> ep = Parallelize(spec, {Strategy::kEp, 2});
  ASSERT_TRUE(ep.ok());
  EXPECT_EQ(VerifyWith(*ep, tp_rules).verdict, Verdict::kUnverified);
  EXPECT_EQ(VerifyWith(*ep, DefaultCatalog({false, false, true})).verdict,
            Verdict::kVerified);
}

// With every rule switched off only trivially replicated pairs verify.
TEST(RuleCatalogTest, EmptyCatalogVerifiesNothingSharded) {
  absl::StatusOr<ModelPair> tp = Parallelize(ModelSpec{}, {Strategy::kTp, 2});
  ASSERT_TRUE(tp.ok());
  RuleCatalog none({}, ParallelismFlags{});
  EXPECT_EQ(VerifyWith(*tp, none).verdict, Verdict::kUnverified);
}

}  // namespace
}  // namespace graphcheck
