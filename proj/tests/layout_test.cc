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

#include "graphcheck/layout.h"

#include <numeric>
#include <random>

#include "absl/strings/match.h"
#include "gtest/gtest.h"

namespace graphcheck {
namespace {

// Index oracle written against row-major strides, independent of the library.
std::vector<int64_t> Strides(const std::vector<int64_t>& dims) {
  std::vector<int64_t> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) {
    s[i] = s[i + 1] * dims[i + 1];
  }
  return s;
}

struct Oracle {
  std::vector<int64_t> dims;
  std::vector<int64_t> gather;  // output flat -> original flat

  explicit Oracle(const Shape& in) : dims(in.dims) {
    gather.resize(in.NumElements());
    std::iota(gather.begin(), gather.end(), 0);
  }

  void Transpose(const std::vector<int64_t>& perm) {
    std::vector<int64_t> out_dims(perm.size());
    for (size_t d = 0; d < perm.size(); ++d) out_dims[d] = dims[perm[d]];
    std::vector<int64_t> in_s = Strides(dims), out_s = Strides(out_dims);
    std::vector<int64_t> next(gather.size());
    for (int64_t k = 0; k < static_cast<int64_t>(gather.size()); ++k) {
      int64_t src = 0;
      for (size_t d = 0; d < perm.size(); ++d) {
        int64_t j = (k / out_s[d]) % out_dims[d];
        src += j * in_s[perm[d]];
      }
      next[k] = gather[src];
    }
    gather = std::move(next);
    dims = std::move(out_dims);
  }

  void Reshape(const Shape& target) { dims = target.dims; }

  void Apply(const LayoutTerm& l) {
    for (const LayoutPrim& p : l.prims()) {
      if (p.kind == LayoutPrim::Kind::kTranspose) {
        Transpose(p.perm);
      } else {
        Reshape(p.target);
      }
    }
  }
};

TEST(LayoutTest, TransposeGatherConvention) {
  absl::StatusOr<std::vector<int64_t>> t =
      ApplyToIndices(LayoutTerm::Transpose({1, 0}), Shape{2, 3});
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(*t, (std::vector<int64_t>{0, 3, 1, 4, 2, 5}));
  EXPECT_EQ(*OutputShape(LayoutTerm::Transpose({1, 0}), Shape{2, 3}),
            (Shape{3, 2}));
}

TEST(LayoutTest, ToString) {
  EXPECT_EQ(LayoutTerm().ToString(), "[]");
  EXPECT_EQ(
      LayoutTerm::Bijection(Shape{64, 4, 4096}, {1, 0, 2}, Shape{256, 4096})
          .ToString(),
      "[reshape(64,4,4096), transpose(1,0,2), reshape(256,4096)]");
}

TEST(LayoutTest, ComposeAppliesFirstArgumentFirst) {
  LayoutTerm a = LayoutTerm::Transpose({1, 2, 0});
  LayoutTerm b = LayoutTerm::Transpose({2, 0, 1});
  Shape in{2, 3, 5};
  Oracle o(in);
  o.Apply(a);
  o.Apply(b);
  LayoutTerm ab = Compose(a, b);
  EXPECT_EQ(*ApplyToIndices(ab, in), o.gather);
  // These two are mutually inverse, so the fused transpose disappears.
  EXPECT_TRUE(ab.empty());
  LayoutTerm r =
      Compose(LayoutTerm::Reshape({6, 5}), LayoutTerm::Reshape({30}));
  EXPECT_EQ(r, LayoutTerm::Reshape({30}));
}

TEST(LayoutTest, ComposeCheckedRejectsShapeMismatch) {
  EXPECT_FALSE(ComposeChecked(LayoutTerm::Reshape({6}),
                              LayoutTerm::Transpose({1, 0}), Shape{2, 3})
                   .ok());
  EXPECT_FALSE(OutputShape(LayoutTerm::Reshape({7}), Shape{2, 3}).ok());
}

TEST(LayoutTest, GroupingReshape) {
  EXPECT_TRUE(IsGroupingReshape(Shape{4, 64, 4096}, Shape{256, 4096}));
  EXPECT_TRUE(IsGroupingReshape(Shape{6}, Shape{2, 3}));
  EXPECT_FALSE(IsGroupingReshape(Shape{2, 3}, Shape{3, 2}));
  EXPECT_TRUE(IsGroupingReshape(Shape{12, 2}, Shape{2, 12}));
  EXPECT_FALSE(IsGroupingReshape(Shape{3, 2, 4}, Shape{2, 12}));
}

TEST(LayoutTest, NormalFormOfWorkedCase) {
  // transpose then merge, written the long way round.
  LayoutTerm l({LayoutPrim::Reshape({64, 4, 64, 64}),
                LayoutPrim::Transpose({1, 0, 2, 3}),
                LayoutPrim::Reshape({256, 4096})});
  absl::StatusOr<LayoutTerm> n = NormalizeLayout(l, Shape{64, 4, 4096});
  ASSERT_TRUE(n.ok()) << n.status();
  EXPECT_EQ(n->ToString(), "[transpose(1,0,2), reshape(256,4096)]");
}

TEST(LayoutTest, NormalFormEmptyForIdentity) {
  LayoutTerm l({LayoutPrim::Reshape({6, 5}), LayoutPrim::Transpose({1, 0}),
                LayoutPrim::Transpose({1, 0}), LayoutPrim::Reshape({2, 3, 5})});
  absl::StatusOr<LayoutTerm> n = NormalizeLayout(l, Shape{2, 3, 5});
  ASSERT_TRUE(n.ok());
  EXPECT_TRUE(n->empty());
  EXPECT_TRUE(IsIdentityOn(l, Shape{2, 3, 5}));
  EXPECT_FALSE(IsIdentityOn(LayoutTerm::Transpose({1, 0}), Shape{2, 2}));
}

TEST(LayoutTest, NonGroupingFallsBack) {
  LayoutTerm l({LayoutPrim::Transpose({1, 0}), LayoutPrim::Reshape({2, 3})});
  EXPECT_FALSE(NormalizeLayout(l, Shape{2, 3}).ok());
  EXPECT_EQ(CanonicalLayout(l, Shape{2, 3}), l);
}

// Random layouts over small shapes.
class RandomLayouts {
 public:
  explicit RandomLayouts(uint32_t seed) : rng_(seed) {}

  Shape RandomShape() {
    int rank = Uniform(1, 4);
    std::vector<int64_t> d;
    for (int i = 0; i < rank; ++i) d.push_back(Uniform(1, 4));
    return Shape(std::move(d));
  }

  // A grouping term of `steps` primitives starting at `in`.
  LayoutTerm Term(const Shape& in, int steps) {
    std::vector<LayoutPrim> prims;
    std::vector<int64_t> cur = in.dims;
    for (int s = 0; s < steps; ++s) {
      if (Uniform(0, 1) == 0) {
        std::vector<int64_t> p(cur.size());
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), rng_);
        std::vector<int64_t> next(cur.size());
        for (size_t i = 0; i < p.size(); ++i) next[i] = cur[p[i]];
        cur = next;
        prims.push_back(LayoutPrim::Transpose(p));
      } else {
        cur = GroupingReshape(cur);
        prims.push_back(LayoutPrim::Reshape(Shape(cur)));
      }
    }
    return LayoutTerm(std::move(prims));
  }

 private:
  int Uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }

  // Merges two adjacent dims or splits one dim into a factor pair.
  std::vector<int64_t> GroupingReshape(std::vector<int64_t> d) {
    if (d.size() >= 2 && Uniform(0, 1) == 0) {
      size_t i = Uniform(0, static_cast<int>(d.size()) - 2);
      d[i] *= d[i + 1];
      d.erase(d.begin() + i + 1);
      return d;
    }
    size_t i = Uniform(0, static_cast<int>(d.size()) - 1);
    std::vector<int64_t> divisors;
    for (int64_t f = 1; f <= d[i]; ++f) {
      if (d[i] % f == 0) divisors.push_back(f);
    }
    int64_t f = divisors[Uniform(0, static_cast<int>(divisors.size()) - 1)];
    int64_t rest = d[i] / f;
    d[i] = rest;
    d.insert(d.begin() + i, f);
    return d;
  }

  std::mt19937 rng_;
};

TEST(LayoutPropertyTest, GatherTableMatchesOracle) {
  RandomLayouts gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    Shape in = gen.RandomShape();
    LayoutTerm l = gen.Term(in, 4);
    Oracle o(in);
    o.Apply(l);
    absl::StatusOr<std::vector<int64_t>> t = ApplyToIndices(l, in);
    ASSERT_TRUE(t.ok()) << l.ToString();
    EXPECT_EQ(*t, o.gather) << l.ToString() << " on " << in.ToString();
    EXPECT_EQ(OutputShape(l, in)->dims, o.dims);
  }
}

TEST(LayoutPropertyTest, InverseUndoes) {
  RandomLayouts gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    Shape in = gen.RandomShape();
    LayoutTerm l = gen.Term(in, 4);
    absl::StatusOr<LayoutTerm> inv = Invert(l, in);
    ASSERT_TRUE(inv.ok());
    EXPECT_TRUE(IsIdentityOn(Compose(l, *inv), in)) << l.ToString();
    Shape out = *OutputShape(l, in);
    EXPECT_TRUE(IsIdentityOn(Compose(*inv, l), out)) << l.ToString();
  }
}

TEST(LayoutPropertyTest, InvertPermutationIsTwoSidedInverse) {
  std::vector<int64_t> p = {3, 0, 4, 1, 2};
  std::vector<int64_t> q = InvertPermutation(p);
  for (size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(q[p[i]], static_cast<int64_t>(i));
    EXPECT_EQ(p[q[i]], static_cast<int64_t>(i));
  }
}

// Terms whose reshapes split a merged dim across atom boundaries lie outside
// the normal form's scope; those fall back to the syntactic form.
TEST(LayoutPropertyTest, NormalFormPreservesElementMap) {
  RandomLayouts gen(13);
  int normalized = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Shape in = gen.RandomShape();
    LayoutTerm l = gen.Term(in, 5);
    absl::StatusOr<LayoutTerm> n = NormalizeLayout(l, in);
    LayoutTerm c = CanonicalLayout(l, in);
    EXPECT_EQ(*ApplyToIndices(c, in), *ApplyToIndices(l, in));
    if (!n.ok()) {
      EXPECT_TRUE(
          absl::StrContains(n.status().message(), "NonGroupingReshape"));
      continue;
    }
    ++normalized;
    EXPECT_EQ(c, *n);
    EXPECT_LE(n->prims().size(), 3);
    EXPECT_EQ(*ApplyToIndices(*n, in), *ApplyToIndices(l, in))
        << l.ToString() << " vs " << n->ToString();
    EXPECT_EQ(*OutputShape(*n, in), *OutputShape(l, in));
    // Idempotent.
    EXPECT_EQ(*NormalizeLayout(*n, in), *n);
  }
  EXPECT_GT(normalized, 200);
}

TEST(LayoutPropertyTest, EqualElementMapsShareANormalForm) {
  RandomLayouts gen(17);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Shape in = gen.RandomShape();
    LayoutTerm l = gen.Term(in, 4);
    Shape out = *OutputShape(l, in);
    // Pad with a detour that cancels out.
    LayoutTerm detour = gen.Term(out, 3);
    LayoutTerm padded = Compose(Compose(l, detour), *Invert(detour, out));
    ASSERT_EQ(*ApplyToIndices(padded, in), *ApplyToIndices(l, in));
    absl::StatusOr<LayoutTerm> a = NormalizeLayout(l, in);
    absl::StatusOr<LayoutTerm> b = NormalizeLayout(padded, in);
    if (!a.ok() || !b.ok()) continue;
    ++compared;
    EXPECT_EQ(*a, *b) << l.ToString() << " vs " << padded.ToString();
  }
  EXPECT_GT(compared, 150);
}

}  // namespace
}  // namespace graphcheck
