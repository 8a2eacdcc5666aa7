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

#include "graphcheck/egraph.h"

#include <algorithm>
#include <random>

#include "absl/strings/str_cat.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

using ::testing::ElementsAre;

const ReplicaGroup kWorld2{{0, 1}};

ClassId Leaf(EGraph& eg, GraphKind kind, const std::string& id) {
  std::string key = (kind == GraphKind::kBaseline ? "B." : "D.") + id;
  return eg.ClassOf(eg.Add(OpKind::Input(), {}, key, std::nullopt, Shape{2, 2},
                           DType::kF32, Origin{kind, id}));
}

ClassId Apply(EGraph& eg, OpKind op, std::vector<ClassId> children,
              GraphKind kind, const std::string& id) {
  return eg.ClassOf(eg.Add(std::move(op), std::move(children), "", std::nullopt,
                           Shape{2, 2}, DType::kF32, Origin{kind, id}));
}

TEST(EGraphTest, HashconsSharesStructurallyEqualNodes) {
  EGraph eg;
  ClassId x = Leaf(eg, GraphKind::kBaseline, "x");
  ClassId a = Apply(eg, OpKind::Elem("relu"), {x}, GraphKind::kBaseline, "a");
  ClassId b =
      Apply(eg, OpKind::Elem("relu"), {x}, GraphKind::kDistributed, "b");
  EXPECT_EQ(a, b);
  EXPECT_EQ(eg.num_nodes(), 2);
  EXPECT_TRUE(eg.HasSide(a, GraphKind::kBaseline));
  EXPECT_TRUE(eg.HasSide(a, GraphKind::kDistributed));
  EXPECT_EQ(eg.ClassName(a), "B.a");
}

TEST(EGraphTest, LeavesWithDifferentKeysStayApart) {
  EGraph eg;
  ClassId x = Leaf(eg, GraphKind::kBaseline, "x");
  ClassId y = Leaf(eg, GraphKind::kDistributed, "x");
  EXPECT_NE(x, y);
}

TEST(EGraphTest, RankLocalKeysStayApart) {
  EGraph eg;
  ClassId x = Leaf(eg, GraphKind::kDistributed, "x");
  ENodeId r0 = eg.Add(OpKind::Elem("neg"), {x}, "@r0", 0, Shape{2, 2},
                      DType::kF32, Origin{GraphKind::kDistributed, "n0"});
  ENodeId r1 = eg.Add(OpKind::Elem("neg"), {x}, "@r1", 1, Shape{2, 2},
                      DType::kF32, Origin{GraphKind::kDistributed, "n1"});
  EXPECT_NE(eg.ClassOf(r0), eg.ClassOf(r1));
}

TEST(EGraphTest, CongruenceAfterRebuild) {
  EGraph eg;
  ClassId x = Leaf(eg, GraphKind::kBaseline, "x");
  ClassId y = Leaf(eg, GraphKind::kDistributed, "y");
  ClassId fx = Apply(eg, OpKind::Elem("relu"), {x}, GraphKind::kBaseline, "f");
  ClassId fy =
      Apply(eg, OpKind::Elem("relu"), {y}, GraphKind::kDistributed, "g");
  ClassId gfx = Apply(eg, OpKind::Elem("neg"), {fx}, GraphKind::kBaseline, "h");
  ClassId gfy =
      Apply(eg, OpKind::Elem("neg"), {fy}, GraphKind::kDistributed, "k");
  ASSERT_NE(eg.Find(fx), eg.Find(fy));
  EXPECT_TRUE(eg.Merge(x, y));
  EXPECT_TRUE(eg.NeedsRebuild());
  eg.Rebuild();
  EXPECT_EQ(eg.Find(fx), eg.Find(fy));
  EXPECT_EQ(eg.Find(gfx), eg.Find(gfy));
  EXPECT_FALSE(eg.Merge(x, y));
  EXPECT_EQ(eg.Find(x), std::min(x, y));
}

TEST(EGraphTest, OriginLookup) {
  EGraph eg;
  ClassId x = Leaf(eg, GraphKind::kBaseline, "x");
  EXPECT_EQ(eg.ClassOfOrigin(GraphKind::kBaseline, "x"), x);
  EXPECT_FALSE(eg.ClassOfOrigin(GraphKind::kDistributed, "x").has_value());
}

// Random chains merged in random order end in the same partition regardless
// of the order of the merges.
TEST(EGraphTest, MergeOrderDoesNotChangePartition) {
  auto build = [](std::vector<std::pair<int, int>> merges) {
    EGraph eg;
    std::vector<ClassId> leaves, users;
    for (int i = 0; i < 8; ++i) {
      leaves.push_back(Leaf(eg, GraphKind::kBaseline, absl::StrCat("x", i)));
    }
    for (int i = 0; i < 8; ++i) {
      users.push_back(Apply(eg, OpKind::Elem("relu"), {leaves[i]},
                            GraphKind::kBaseline, absl::StrCat("u", i)));
    }
    for (auto [a, b] : merges) eg.Merge(leaves[a], leaves[b]);
    eg.Rebuild();
    std::vector<ClassId> out;
    for (ClassId u : users) out.push_back(eg.Find(u));
    return out;
  };
  std::vector<std::pair<int, int>> merges = {{0, 1}, {2, 3}, {1, 3}, {5, 6}};
  std::vector<ClassId> want = build(merges);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(merges.begin(), merges.end(), rng);
    EXPECT_EQ(build(merges), want);
  }
  EXPECT_EQ(want[0], want[3]);
  EXPECT_NE(want[0], want[4]);
}

TEST(FactDBTest, InsertDeduplicatesAndIndexes) {
  FactDB db;
  EXPECT_TRUE(db.Insert(Fact::Duplicate(0, 1, kWorld2), 0, "seed"));
  EXPECT_FALSE(db.Insert(Fact::Duplicate(0, 1, kWorld2), 3, "again"));
  EXPECT_TRUE(db.Insert(Fact::Sharded(0, 2, 1, kWorld2), 1, "r"));
  EXPECT_EQ(db.size(), 2);
  EXPECT_EQ(db.facts()[0].rule, "seed");
  EXPECT_THAT(db.About(0), ElementsAre(0, 1));
  EXPECT_EQ(db.WithT(FactKind::kSharded, 0).size(), 1u);
  EXPECT_EQ(db.WithTp(FactKind::kDuplicate, 1).size(), 1u);
}

TEST(FactDBTest, CanonicalizeFoldsMergedFacts) {
  EGraph eg;
  ClassId x = Leaf(eg, GraphKind::kBaseline, "x");
  ClassId y = Leaf(eg, GraphKind::kDistributed, "y");
  ClassId z = Leaf(eg, GraphKind::kDistributed, "z");
  FactDB db;
  db.Insert(Fact::Duplicate(x, y, kWorld2), 0, "a");
  db.Insert(Fact::Duplicate(x, z, kWorld2), 0, "b");
  eg.Merge(y, z);
  eg.Rebuild();
  db.Canonicalize(eg);
  EXPECT_EQ(db.WithT(FactKind::kDuplicate, x).size(), 1u);
}

TEST(RelationTest, FactRendering) {
  ClassNamer name = [](ClassId c) { return absl::StrCat("c", c); };
  EXPECT_EQ(FactToString(Fact::Sharded(0, 1, 1, kWorld2), name),
            "sharded(c0, c1, dim=1, group=[0,1])");
}

TEST(RelationTest, SliceCoverage) {
  std::vector<SliceRef> a = {{1, 0, 2}, {2, 2, 2}};
  EXPECT_TRUE(SlicesCover(a, 4));
  EXPECT_FALSE(SlicesCover(a, 6));
  std::vector<SliceRef> b = {{3, 4, 2}};
  EXPECT_TRUE(SlicesDisjoint(a, b));
  EXPECT_TRUE(SlicesCover(SliceUnion(a, b), 6));
  EXPECT_FALSE(SlicesDisjoint(a, {{4, 1, 2}}));
}

TEST(RelationTest, ShapeCheckRejectsMismatchedShard) {
  auto shape = [](ClassId c) { return c == 0 ? Shape{8, 4} : Shape{8, 3}; };
  EXPECT_FALSE(CheckFactShapes(Fact::Sharded(0, 1, 1, kWorld2), shape).ok());
  auto ok_shape = [](ClassId c) { return c == 0 ? Shape{8, 4} : Shape{8, 2}; };
  EXPECT_TRUE(CheckFactShapes(Fact::Sharded(0, 1, 1, kWorld2), ok_shape).ok());
}

}  // namespace
}  // namespace graphcheck
