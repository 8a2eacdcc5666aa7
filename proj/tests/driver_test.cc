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

#include "graphcheck/driver.h"

#include "gmock/gmock.h"
#include "graphcheck/builder.h"
#include "graphcheck/oracle.h"
#include "graphcheck/synth.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

const ReplicaGroup kWorld4{{0, 1, 2, 3}};

Graph MatmulBaseline() {
  GraphBuilder b(GraphKind::kBaseline);
  b.set_layer(0);
  b.Input("x", Shape{8, 16});
  b.Input("w", Shape{16, 32});
  b.Input("bias", Shape{8, 32});
  b.Dot("z", "x", "w");
  b.Elem("a", "add", {"z", "bias"});
  b.Transpose("t", "a", {1, 0});
  b.Reshape("r", "t", Shape{4, 64});
  b.AddOutput("r");
  return std::move(b).Build();
}

// Contraction-sharded dot per rank followed by an all-reduce over `group`.
Graph MatmulDistributed(const ReplicaGroup& group) {
  GraphBuilder b(GraphKind::kDistributed);
  b.set_layer(0);
  b.Input("x", Shape{8, 4});
  b.Input("w", Shape{4, 32});
  b.Input("bias", Shape{8, 32});
  b.Dot("z", "x", "w");
  b.Add("ar", OpKind::AllReduce(group, Combiner::kAdd), {"z"});
  b.Elem("a", "add", {"ar", "bias"});
  b.Transpose("t", "a", {1, 0});
  b.Reshape("r", "t", Shape{4, 64});
  b.AddOutput("r");
  return std::move(b).Build();
}

AnnotationSet MatmulAnnotations() {
  AnnotationSet ann;
  ann.entries.push_back({"x", {"x"}, RelationKindTag::kShard, 1, kWorld4});
  ann.entries.push_back({"w", {"w"}, RelationKindTag::kShard, 0, kWorld4});
  ann.entries.push_back(
      {"bias", {"bias"}, RelationKindTag::kReplicate, 0, kWorld4});
  return ann;
}

TEST(VerifyPair, TensorParallelMatmulVerifies) {
  VerifyOptions opts;
  opts.dump_facts = true;
  VerificationOutcome out =
      VerifyPair(MatmulBaseline(), MatmulDistributed(kWorld4),
                 MatmulAnnotations(), DefaultCatalog({}), opts);
  EXPECT_EQ(out.verdict, Verdict::kVerified) << out.report.summary << "\n"
                                             << out.fact_dump;
  EXPECT_THAT(out.fact_dump, HasSubstr("partial(B.z, D.z"));
}

TEST(VerifyPair, HalfGroupAllReduceIsLocalized) {
  VerifyOptions opts;
  opts.dump_facts = true;
  VerificationOutcome out =
      VerifyPair(MatmulBaseline(), MatmulDistributed(ReplicaGroup{{0, 1}}),
                 MatmulAnnotations(), DefaultCatalog({}), opts);
  EXPECT_EQ(out.verdict, Verdict::kUnverified) << out.fact_dump;
  std::vector<std::string> dist_frontier;
  for (const FrontierNode& f : out.report.frontier) {
    if (f.side == GraphKind::kDistributed) dist_frontier.push_back(f.id);
  }
  EXPECT_THAT(dist_frontier, ElementsAre("ar"));
}

ModelPair Mlp(int64_t layers, Strategy strategy, int64_t degree) {
  ModelSpec spec;
  spec.layers = layers;
  absl::StatusOr<ModelPair> p = Parallelize(spec, {strategy, degree});
  EXPECT_TRUE(p.ok()) << p.status();
  return *std::move(p);
}

VerificationOutcome VerifyModel(const ModelPair& p, VerifyOptions opts = {}) {
  return VerifyPair(p.base, p.dist, p.ann, DefaultCatalog({}), opts);
}

TEST(VerifyPair, IdenticalLayersHitTheMemo) {
  ModelPair p = Mlp(6, Strategy::kTp, 2);
  VerificationOutcome memo = VerifyModel(p);
  EXPECT_EQ(memo.verdict, Verdict::kVerified) << memo.report.summary;
  EXPECT_EQ(memo.rewrites, 1);
  EXPECT_EQ(memo.memo_hits, 5);
  VerifyOptions off;
  off.memo = false;
  VerificationOutcome plain = VerifyModel(p, off);
  EXPECT_EQ(plain.verdict, memo.verdict);
  EXPECT_EQ(plain.rewrites, 6);
  EXPECT_EQ(plain.memo_hits, 0);
  ASSERT_EQ(plain.layers.size(), memo.layers.size());
  for (size_t i = 0; i < plain.layers.size(); ++i) {
    EXPECT_EQ(plain.layers[i].fingerprint, memo.layers[i].fingerprint);
  }
}

TEST(VerifyPair, PartitionedAgreesWithMonolithic) {
  for (Strategy s : {Strategy::kTp, Strategy::kSp}) {
    ModelPair p = Mlp(2, s, 2);
    VerifyOptions mono;
    mono.partition = false;
    EXPECT_EQ(VerifyModel(p).verdict, Verdict::kVerified);
    EXPECT_EQ(VerifyModel(p, mono).verdict, Verdict::kVerified);
  }
}

TEST(VerifyPair, ParallelMatchingIsDeterministic) {
  ModelPair p = Mlp(2, Strategy::kSp, 4);
  VerifyOptions one, eight;
  one.dump_facts = eight.dump_facts = true;
  eight.engine.jobs = 8;
  VerificationOutcome a = VerifyModel(p, one);
  VerificationOutcome b = VerifyModel(p, eight);
  EXPECT_EQ(a.fact_dump, b.fact_dump);
  EXPECT_EQ(RenderReport(a.report, ReportFormat::kJson),
            RenderReport(b.report, ReportFormat::kJson));
}

TEST(VerifyPair, ExhaustedBudgetIsInconclusive) {
  ModelPair p = Mlp(1, Strategy::kTp, 2);
  VerifyOptions opts;
  opts.engine.budget.max_iterations = 1;
  EXPECT_EQ(VerifyModel(p, opts).verdict, Verdict::kInconclusive);
}

TEST(VerifyPair, KeepGoingReportsLaterLayers) {
  ModelPair p = Mlp(3, Strategy::kTp, 2);
  std::vector<BugInjection> sites = InjectionSites(p, 2);
  ASSERT_FALSE(sites.empty());
  absl::StatusOr<ModelPair> bug = Inject(p, sites[0]);
  ASSERT_TRUE(bug.ok());
  VerificationOutcome abort = VerifyModel(*bug);
  EXPECT_EQ(abort.verdict, Verdict::kUnverified);
  EXPECT_EQ(abort.layers.size(), 1u);
  VerifyOptions opts;
  opts.keep_going = true;
  VerificationOutcome all = VerifyModel(*bug, opts);
  EXPECT_EQ(all.verdict, Verdict::kUnverified);
  EXPECT_EQ(all.layers.size(), 3u);
}

// The all-reduce moved past the layer boundary: correct, but the boundary
// only carries a partial sum, so the verifier reports unverified.
TEST(VerifyPair, CrossBoundaryReductionIsUnverifiedButCorrect) {
  const ReplicaGroup world{{0, 1}};
  GraphBuilder b(GraphKind::kBaseline);
  b.set_layer(0);
  b.Input("x", Shape{4, 8});
  b.Input("w", Shape{8, 4});
  b.Dot("h", "x", "w");
  b.set_layer(1);
  b.Elem("y", "relu", {"h"});
  b.AddOutput("y");
  GraphBuilder d(GraphKind::kDistributed);
  d.set_layer(0);
  d.Input("x", Shape{4, 4});
  d.Input("w", Shape{4, 4});
  d.Dot("h", "x", "w");
  d.set_layer(1);
  d.Add("ar", OpKind::AllReduce(world, Combiner::kAdd), {"h"});
  d.Elem("y", "relu", {"ar"});
  d.AddOutput("y");
  AnnotationSet ann;
  ann.entries.push_back({"x", {"x"}, RelationKindTag::kShard, 1, world});
  ann.entries.push_back({"w", {"w"}, RelationKindTag::kShard, 0, world});
  for (uint64_t seed = 0; seed < 3; ++seed) {
    absl::StatusOr<OracleResult> r =
        OracleExecute(b.graph(), d.graph(), ann, seed);
    ASSERT_TRUE(r.ok());
    EXPECT_TRUE(r->equal) << r->witness;
  }
  VerificationOutcome out =
      VerifyPair(b.graph(), d.graph(), ann, DefaultCatalog({}), {});
  EXPECT_EQ(out.verdict, Verdict::kUnverified);
  VerifyOptions mono;
  mono.partition = false;
  EXPECT_EQ(
      VerifyPair(b.graph(), d.graph(), ann, DefaultCatalog({}), mono).verdict,
      Verdict::kVerified);
}

TEST(PartitionLayers, RejectsUntaggedNodes) {
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("x", Shape{2});
  b.Elem("y", "neg", {"x"});
  GraphBuilder d(GraphKind::kDistributed);
  d.set_layer(0);
  d.Input("x", Shape{2});
  d.Elem("y", "neg", {"x"});
  absl::StatusOr<std::vector<LayerPair>> parts =
      PartitionLayers(b.graph(), d.graph());
  EXPECT_THAT(std::string(parts.status().message()), HasSubstr("UntaggedNode"));
}

}  // namespace
}  // namespace graphcheck
