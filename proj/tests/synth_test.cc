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

#include "graphcheck/synth.h"

#include <set>

#include "absl/strings/match.h"
#include "gmock/gmock.h"
#include "graphcheck/builder.h"
#include "graphcheck/graph_io.h"
#include "graphcheck/oracle.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

const ReplicaGroup kPair{{0, 1}};

struct HandDot {
  Graph base{GraphKind::kBaseline};
  Graph dist{GraphKind::kDistributed};
  AnnotationSet ann;
};

// [[1,2],[3,4]] . [[5,6],[7,8]] with the contraction dim split over two
// ranks.
HandDot MakeHandDot(Combiner combiner) {
  HandDot h;
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("x", Shape{2, 2});
  b.Input("w", Shape{2, 2});
  b.Dot("z", "x", "w");
  b.AddOutput("z");
  h.base = std::move(b).Build();
  GraphBuilder d(GraphKind::kDistributed);
  d.Input("x", Shape{2, 1});
  d.Input("w", Shape{1, 2});
  d.Dot("z", "x", "w");
  d.Add("ar", OpKind::AllReduce(kPair, combiner), {"z"});
  d.AddOutput("ar");
  h.dist = std::move(d).Build();
  h.ann.entries.push_back({"x", {"x"}, RelationKindTag::kShard, 1, kPair});
  h.ann.entries.push_back({"w", {"w"}, RelationKindTag::kShard, 0, kPair});
  return h;
}

const InputValues kHandInputs = {{"x", {1, 2, 3, 4}}, {"w", {5, 6, 7, 8}}};

TEST(OracleTest, HandComputedDot) {
  HandDot h = MakeHandDot(Combiner::kAdd);
  absl::StatusOr<OracleResult> r =
      OracleExecute(h.base, h.dist, h.ann, 0, kHandInputs);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_TRUE(r->equal) << r->witness;
  ASSERT_EQ(r->baseline_outputs.size(), 1u);
  EXPECT_THAT(r->baseline_outputs[0], ElementsAre("19", "22", "43", "50"));
}

TEST(OracleTest, WrongCombinerDiffers) {
  HandDot h = MakeHandDot(Combiner::kMax);
  absl::StatusOr<OracleResult> r =
      OracleExecute(h.base, h.dist, h.ann, 0, kHandInputs);
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->equal);
  EXPECT_THAT(r->witness, HasSubstr("baseline 19 vs distributed 14"));
}

TEST(OracleTest, ExpIsUnimplemented) {
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("x", Shape{2});
  b.Elem("e", "exp", {"x"});
  b.AddOutput("e");
  Graph base = std::move(b).Build();
  GraphBuilder d(GraphKind::kDistributed);
  d.Input("x", Shape{2});
  d.Elem("e", "exp", {"x"});
  d.AddOutput("e");
  AnnotationSet ann;
  ann.entries.push_back({"x", {"x"}, RelationKindTag::kReplicate, 0, kPair});
  absl::StatusOr<OracleResult> r =
      OracleExecute(base, std::move(d).Build(), ann, 0);
  EXPECT_EQ(r.status().code(), absl::StatusCode::kUnimplemented);
}

TEST(OracleTest, FixedInputSizeIsChecked) {
  HandDot h = MakeHandDot(Combiner::kAdd);
  EXPECT_FALSE(OracleExecute(h.base, h.dist, h.ann, 0, {{"x", {1}}}).ok());
}

int64_t CountIf(const Graph& g, absl::string_view needle) {
  int64_t n = 0;
  for (const TensorNode& node : g.nodes()) {
    if (absl::StrContains(node.id, needle)) ++n;
  }
  return n;
}

TEST(SynthTest, MlpLayerHasFiveOps) {
  ModelSpec spec;
  absl::StatusOr<Graph> g = BuildBaseline(spec);
  ASSERT_TRUE(g.ok());
  int64_t ops = 0;
  for (const TensorNode& n : g->nodes()) {
    if (n.op.code != OpCode::kInput && n.layer == 0) ++ops;
  }
  EXPECT_EQ(ops, 5);
}

TEST(SynthTest, MoeCombinesExpertsWithAnAddChain) {
  ModelSpec spec;
  spec.kind = ModelKind::kMoe;
  spec.experts = 4;
  absl::StatusOr<Graph> g = BuildBaseline(spec);
  ASSERT_TRUE(g.ok());
  EXPECT_EQ(CountIf(*g, ".acc"), 3);
}

TEST(SynthTest, IndivisibleDegreeIsRejected) {
  ModelSpec spec;
  absl::StatusOr<ModelPair> p = Parallelize(spec, {Strategy::kTp, 3});
  EXPECT_THAT(std::string(p.status().message()), HasSubstr("IndivisibleDim"));
}

TEST(SynthTest, InvalidSpecIsRejected) {
  ModelSpec spec;
  spec.kind = ModelKind::kAttention;
  spec.hidden = 10;
  spec.heads = 4;
  EXPECT_FALSE(ValidateModelSpec(spec).ok());
}

TEST(SynthTest, GenerationIsDeterministic) {
  ModelSpec spec;
  spec.kind = ModelKind::kAttention;
  absl::StatusOr<ModelPair> a = Parallelize(spec, {Strategy::kSp, 2});
  absl::StatusOr<ModelPair> b = Parallelize(spec, {Strategy::kSp, 2});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(SerializeGraph(a->dist), SerializeGraph(b->dist));
  EXPECT_EQ(SerializeAnnotations(a->ann), SerializeAnnotations(b->ann));
}

TEST(SynthTest, GeneratedGraphsValidate) {
  absl::StatusOr<std::vector<CorpusCase>> corpus = BuildCorrectCorpus();
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  for (const CorpusCase& c : *corpus) {
    EXPECT_TRUE(ValidateGraph(c.pair.base).empty()) << c.name;
    EXPECT_TRUE(ValidateGraph(c.pair.dist).empty()) << c.name;
    EXPECT_TRUE(ValidateAnnotations(c.pair.ann, c.pair.base, c.pair.dist).ok())
        << c.name;
  }
}

// Every correct pair of the matrix agrees with its baseline on ten seeds.
TEST(SynthTest, GeneratorSoundness) {
  absl::StatusOr<std::vector<CorpusCase>> corpus = BuildCorrectCorpus();
  ASSERT_TRUE(corpus.ok());
  for (const CorpusCase& c : *corpus) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      absl::StatusOr<OracleResult> r =
          OracleExecute(c.pair.base, c.pair.dist, c.pair.ann, seed);
      ASSERT_TRUE(r.ok()) << c.name << ": " << r.status();
      EXPECT_TRUE(r->equal) << c.name << " seed " << seed << ": " << r->witness;
    }
  }
}

TEST(SynthTest, BugCorpusCoversAllCategoriesAndManifests) {
  absl::StatusOr<std::vector<CorpusCase>> corpus = BuildBugCorpus();
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  std::set<int> categories;
  for (const CorpusCase& c : *corpus) {
    ASSERT_TRUE(c.bug.has_value());
    categories.insert(c.bug->category);
    bool differs = false;
    for (uint64_t seed = 0; seed < 3 && !differs; ++seed) {
      absl::StatusOr<OracleResult> r =
          OracleExecute(c.pair.base, c.pair.dist, c.pair.ann, seed);
      ASSERT_TRUE(r.ok());
      differs = !r->equal;
    }
    EXPECT_TRUE(differs) << c.name;
  }
  EXPECT_EQ(categories, (std::set<int>{1, 2, 3, 4, 5}));
  EXPECT_GE(corpus->size(), 20u);
}

TEST(SynthTest, InjectRejectsUnknownSite) {
  absl::StatusOr<ModelPair> p = Parallelize(ModelSpec{}, {Strategy::kTp, 2});
  ASSERT_TRUE(p.ok());
  BugInjection bug{1, "missing", "delete", "missing"};
  EXPECT_THAT(std::string(Inject(*p, bug).status().message()),
              HasSubstr("InapplicableSite"));
}

TEST(SynthTest, InjectionsRevalidate) {
  ModelSpec spec;
  spec.kind = ModelKind::kAttention;
  absl::StatusOr<ModelPair> p = Parallelize(spec, {Strategy::kTp, 2});
  ASSERT_TRUE(p.ok());
  for (int category = 1; category <= 5; ++category) {
    std::vector<BugInjection> sites = InjectionSites(*p, category);
    EXPECT_FALSE(sites.empty()) << category;
    for (const BugInjection& bug : sites) {
      absl::StatusOr<ModelPair> m = Inject(*p, bug);
      ASSERT_TRUE(m.ok()) << bug.site << ": " << m.status();
      EXPECT_TRUE(ValidateGraph(m->dist).empty());
    }
  }
}

}  // namespace
}  // namespace graphcheck
