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

#include "graphcheck/ir.h"

#include <algorithm>
#include <set>

#include "gmock/gmock.h"
#include "graphcheck/builder.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;

TensorNode Node(std::string id, OpKind op, std::vector<std::string> inputs,
                Shape shape) {
  TensorNode n;
  n.id = std::move(id);
  n.op = std::move(op);
  n.inputs = std::move(inputs);
  n.shape = std::move(shape);
  return n;
}

std::vector<ValidationCode> Codes(const Graph& g) {
  std::vector<ValidationCode> codes;
  for (const ValidationError& e : ValidateGraph(g)) codes.push_back(e.code);
  return codes;
}

TEST(InferShapeTest, DotContractsLastAgainstSecondToLast) {
  absl::StatusOr<Shape> s =
      InferShape(OpKind::Dot(), {Shape{4, 8}, Shape{8, 16}});
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(*s, (Shape{4, 16}));
}

TEST(InferShapeTest, BatchedDotAndBroadcastRhs) {
  EXPECT_EQ(*InferShape(OpKind::Dot(), {Shape{2, 4, 8}, Shape{2, 8, 3}}),
            (Shape{2, 4, 3}));
  EXPECT_EQ(*InferShape(OpKind::Dot(), {Shape{2, 4, 8}, Shape{8, 3}}),
            (Shape{2, 4, 3}));
  EXPECT_FALSE(
      InferShape(OpKind::Dot(), {Shape{2, 4, 8}, Shape{3, 8, 3}}).ok());
  EXPECT_FALSE(InferShape(OpKind::Dot(), {Shape{4, 8}, Shape{7, 3}}).ok());
}

TEST(InferShapeTest, ReductionsDropTheReducedDim) {
  EXPECT_EQ(*InferShape(OpKind::MaxReduce(1), {Shape{2, 3, 4}}), (Shape{2, 4}));
  EXPECT_EQ(*InferShape(OpKind::SumReduce(0), {Shape{5}}), Shape{});
}

TEST(InferShapeTest, ElemOpAllowsScalarOperands) {
  EXPECT_EQ(*InferShape(OpKind::Elem("add"), {Shape{2, 3}, Shape{}}),
            (Shape{2, 3}));
  EXPECT_FALSE(
      InferShape(OpKind::Elem("add"), {Shape{2, 3}, Shape{3, 2}}).ok());
}

TEST(InferShapeTest, Collectives) {
  ReplicaGroup g{{0, 1, 2, 3}};
  EXPECT_EQ(*InferShape(OpKind::AllGather(0, g), {Shape{2, 5}}), (Shape{8, 5}));
  EXPECT_EQ(
      *InferShape(OpKind::ReduceScatter(1, g, Combiner::kAdd), {Shape{2, 8}}),
      (Shape{2, 2}));
  EXPECT_FALSE(
      InferShape(OpKind::ReduceScatter(1, g, Combiner::kAdd), {Shape{2, 6}})
          .ok());
  EXPECT_EQ(*InferShape(OpKind::AllReduce(g, Combiner::kAdd),
                        {Shape{3}, Shape{3}, Shape{3}, Shape{3}}),
            Shape{3});
  EXPECT_FALSE(
      InferShape(OpKind::AllReduce(g, Combiner::kAdd), {Shape{3}, Shape{3}})
          .ok());
  EXPECT_FALSE(
      InferShape(OpKind::AllReduce(ReplicaGroup{{0, 0}}, Combiner::kAdd),
                 {Shape{3}})
          .ok());
}

TEST(ReplicaGroupTest, PositionsAndValidation) {
  ReplicaGroup g{{3, 1, 2}};
  EXPECT_EQ(g.PositionOf(1), 1);
  EXPECT_EQ(g.PositionOf(7), -1);
  EXPECT_TRUE(ValidateReplicaGroup(g).ok());
  EXPECT_FALSE(ValidateReplicaGroup(ReplicaGroup{}).ok());
  EXPECT_FALSE(ValidateReplicaGroup(ReplicaGroup{{-1}}).ok());
}

TEST(DTypeTest, LeastPreciseOperandWins) {
  EXPECT_EQ(PromoteDType(DType::kF32, DType::kBF16), DType::kBF16);
  EXPECT_EQ(PromoteDType(DType::kExact, DType::kF32), DType::kF32);
  EXPECT_FALSE(ParseDType("f64").ok());
  EXPECT_EQ(*ParseDType("bf16"), DType::kBF16);
}

TEST(ValidateGraphTest, ReshapeElementCountMismatch) {
  Graph g(GraphKind::kBaseline);
  ASSERT_TRUE(g.AddNode(Node("a", OpKind::Input(), {}, {2, 3})).ok());
  ASSERT_TRUE(
      g.AddNode(Node("b", OpKind::Reshape({4, 2}), {"a"}, {4, 2})).ok());
  g.AddOutput("b");
  EXPECT_THAT(Codes(g), ElementsAre(ValidationCode::kElementCountMismatch));
}

TEST(ValidateGraphTest, TransposeNotAPermutation) {
  Graph g(GraphKind::kBaseline);
  ASSERT_TRUE(g.AddNode(Node("a", OpKind::Input(), {}, {2, 3, 4})).ok());
  ASSERT_TRUE(
      g.AddNode(Node("b", OpKind::Transpose({0, 0, 1}), {"a"}, {2, 2, 3}))
          .ok());
  g.AddOutput("b");
  EXPECT_THAT(Codes(g), ElementsAre(ValidationCode::kNotAPermutation));
}

TEST(ValidateGraphTest, BaselineRejectsCollectivesAndRanks) {
  Graph g(GraphKind::kBaseline);
  TensorNode a = Node("a", OpKind::Input(), {}, {4});
  a.rank = 0;
  ASSERT_TRUE(g.AddNode(a).ok());
  ASSERT_TRUE(
      g.AddNode(Node("b", OpKind::AllReduce(ReplicaGroup{{0}}, Combiner::kAdd),
                     {"a"}, {4}))
          .ok());
  g.AddOutput("b");
  std::vector<ValidationCode> codes = Codes(g);
  EXPECT_NE(
      std::find(codes.begin(), codes.end(), ValidationCode::kRankInBaseline),
      codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(),
                      ValidationCode::kCollectiveInBaseline),
            codes.end());
}

TEST(ValidateGraphTest, MissingOutputUnknownInputAndCycle) {
  Graph g(GraphKind::kBaseline);
  ASSERT_TRUE(g.AddNode(Node("a", OpKind::Input(), {}, {4})).ok());
  g.AddOutput("zz");
  EXPECT_THAT(Codes(g), ElementsAre(ValidationCode::kMissingOutput));

  Graph h(GraphKind::kBaseline);
  ASSERT_TRUE(h.AddNode(Node("a", OpKind::Elem("neg"), {"nope"}, {4})).ok());
  EXPECT_THAT(Codes(h), ElementsAre(ValidationCode::kUnknownInput));

  Graph c(GraphKind::kBaseline);
  ASSERT_TRUE(c.AddNode(Node("a", OpKind::Elem("neg"), {"b"}, {4})).ok());
  ASSERT_TRUE(c.AddNode(Node("b", OpKind::Elem("neg"), {"a"}, {4})).ok());
  EXPECT_THAT(Codes(c), ElementsAre(ValidationCode::kCycle));
}

TEST(ValidateGraphTest, RankPlacement) {
  GraphBuilder b(GraphKind::kDistributed);
  b.set_rank(0);
  b.Input("x0", {4});
  b.set_rank(1);
  b.Input("x1", {4});
  b.set_rank(std::nullopt);
  b.Add("ar", OpKind::AllReduce(ReplicaGroup{{0, 1}}, Combiner::kAdd),
        {"x0", "x1"});
  b.AddOutput("ar");
  EXPECT_THAT(ValidateGraph(b.graph()), IsEmpty());

  // Operands listed against the group order.
  GraphBuilder w(GraphKind::kDistributed);
  w.set_rank(0);
  w.Input("x0", {4});
  w.set_rank(1);
  w.Input("x1", {4});
  w.set_rank(std::nullopt);
  w.Add("ar", OpKind::AllReduce(ReplicaGroup{{0, 1}}, Combiner::kAdd),
        {"x1", "x0"});
  EXPECT_THAT(Codes(w.graph()), ElementsAre(ValidationCode::kRankPlacement,
                                            ValidationCode::kRankPlacement));

  // An SPMD op cannot read a single-rank tensor.
  GraphBuilder s(GraphKind::kDistributed);
  s.set_rank(0);
  s.Input("x0", {4});
  s.set_rank(std::nullopt);
  s.Elem("n", "neg", {"x0"});
  EXPECT_THAT(Codes(s.graph()), ElementsAre(ValidationCode::kRankPlacement));
}

TEST(ValidateGraphTest, LayerTagsMustNotDecrease) {
  GraphBuilder b(GraphKind::kBaseline);
  b.set_layer(1);
  b.Input("a", {4});
  b.set_layer(0);
  b.Elem("n", "neg", {"a"});
  EXPECT_THAT(Codes(b.graph()), ElementsAre(ValidationCode::kLayerOrder));
}

TEST(ValidateGraphTest, DeclaredDTypeMustFollowOperands) {
  Graph g(GraphKind::kBaseline);
  TensorNode a = Node("a", OpKind::Input(), {}, {4});
  a.dtype = DType::kBF16;
  ASSERT_TRUE(g.AddNode(a).ok());
  ASSERT_TRUE(g.AddNode(Node("n", OpKind::Elem("neg"), {"a"}, {4})).ok());
  EXPECT_THAT(Codes(g), ElementsAre(ValidationCode::kDTypeMismatch));
}

Graph Chain() {
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("a", {4});
  b.Elem("b", "neg", {"a"});
  b.Elem("c", "neg", {"b"});
  b.AddOutput("c");
  return std::move(b).Build();
}

Graph Diamond() {
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("a", {4});
  b.Elem("c", "neg", {"a"});
  b.Elem("b", "relu", {"a"});
  b.Elem("d", "add", {"b", "c"});
  b.AddOutput("d");
  return std::move(b).Build();
}

TEST(TopoStagesTest, LinearChain) {
  absl::StatusOr<std::vector<Stage>> stages = TopoStages(Chain());
  ASSERT_TRUE(stages.ok());
  ASSERT_EQ(stages->size(), 3);
  for (const Stage& s : *stages) EXPECT_EQ(s.size(), 1);
}

TEST(TopoStagesTest, Diamond) {
  absl::StatusOr<std::vector<Stage>> stages = TopoStages(Diamond());
  ASSERT_TRUE(stages.ok());
  std::vector<Stage> want = {{{"a"}}, {{"b"}, {"c"}}, {{"d"}}};
  EXPECT_EQ(*stages, want);
}

TEST(TopoStagesTest, BoundaryNodesFollowAllTheirInputs) {
  // Two boundary nodes, each fed by paths of different lengths.
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("x", {4});
  b.Elem("p", "neg", {"x"});
  b.Elem("q", "neg", {"p"});
  b.Elem("B1", "add", {"x", "q"});
  b.Elem("r", "relu", {"B1"});
  b.Elem("B2", "add", {"r", "B1"});
  b.AddOutput("B2");
  Graph g = std::move(b).Build();
  absl::StatusOr<std::vector<Stage>> stages = TopoStages(g);
  ASSERT_TRUE(stages.ok());
  std::map<std::string, size_t> stage_of;
  for (size_t k = 0; k < stages->size(); ++k) {
    for (const auto& group : (*stages)[k]) {
      for (const std::string& id : group) stage_of[id] = k;
    }
  }
  for (const TensorNode& n : g.nodes()) {
    for (const std::string& in : n.inputs) {
      EXPECT_LT(stage_of[in], stage_of[n.id]) << in << " -> " << n.id;
    }
  }
}

TEST(TopoStagesTest, FlattenedStagesFormATopologicalOrder) {
  for (const Graph& g : {Chain(), Diamond()}) {
    absl::StatusOr<std::vector<Stage>> stages = TopoStages(g);
    ASSERT_TRUE(stages.ok());
    std::set<std::string> seen;
    size_t total = 0;
    for (const Stage& s : *stages) {
      for (const auto& group : s) {
        for (const std::string& id : group) {
          for (const std::string& in : g.Get(id).inputs) {
            EXPECT_TRUE(seen.contains(in));
          }
        }
      }
      for (const auto& group : s) {
        for (const std::string& id : group) {
          seen.insert(id);
          ++total;
        }
      }
    }
    EXPECT_EQ(total, g.nodes().size());
  }
}

TEST(TopologicalOrderTest, TiesBrokenById) {
  absl::StatusOr<std::vector<int64_t>> order = TopologicalOrder(Diamond());
  ASSERT_TRUE(order.ok());
  Graph g = Diamond();
  std::vector<std::string> ids;
  for (int64_t i : *order) ids.push_back(g.nodes()[i].id);
  EXPECT_THAT(ids, ElementsAre("a", "b", "c", "d"));
}

TEST(AnnotationTest, ShardNeedsDivisibleLocalShape) {
  GraphBuilder b(GraphKind::kBaseline);
  b.Input("A", {8, 4});
  GraphBuilder d(GraphKind::kDistributed);
  d.Input("A'", {2, 4});
  AnnotationSet ann;
  ann.entries.push_back(
      {"A", {"A'"}, RelationKindTag::kShard, 0, ReplicaGroup{{0, 1, 2, 3}}});
  EXPECT_TRUE(ValidateAnnotations(ann, b.graph(), d.graph()).ok());
  ann.entries[0].dim = 1;
  EXPECT_FALSE(ValidateAnnotations(ann, b.graph(), d.graph()).ok());
  ann.entries[0].dim = 0;
  ann.entries[0].distributed_ids = {"A'", "A'"};
  EXPECT_FALSE(ValidateAnnotations(ann, b.graph(), d.graph()).ok());
  ann.entries[0].distributed_ids = {"A'", "A'", "A'", "A'"};
  EXPECT_TRUE(ValidateAnnotations(ann, b.graph(), d.graph()).ok());
  EXPECT_EQ(WorldOf(ann), (ReplicaGroup{{0, 1, 2, 3}}));
}

}  // namespace
}  // namespace graphcheck
