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

#include "graphcheck/bijection.h"

#include <algorithm>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"

namespace graphcheck {
namespace {

std::vector<std::vector<int>> NonUnitLeafDims(const AxisSpace& space,
                                              const SymLayoutExpr& e) {
  std::vector<std::vector<int>> dims;
  for (const AxisExp& a : e.axes) {
    std::vector<int> kept;
    for (int leaf : a.Leaves(space)) {
      if (space.extent(leaf) != 1) kept.push_back(leaf);
    }
    dims.push_back(std::move(kept));
  }
  return dims;
}

// Atoms directly followed by their successor in the same dim.
absl::flat_hash_map<int, int> Successors(
    const std::vector<std::vector<int>>& dims) {
  absl::flat_hash_map<int, int> next;
  for (const auto& d : dims) {
    for (size_t i = 0; i + 1 < d.size(); ++i) next[d[i]] = d[i + 1];
  }
  return next;
}

SymLayoutExpr CutRuns(const std::vector<std::vector<int>>& dims,
                      const absl::flat_hash_map<int, int>& keep_with_next) {
  SymLayoutExpr out;
  for (const auto& d : dims) {
    AxisExp run;
    for (size_t i = 0; i < d.size(); ++i) {
      run.atoms.push_back(d[i]);
      bool joined = i + 1 < d.size() && keep_with_next.contains(d[i]) &&
                    keep_with_next.at(d[i]) == d[i + 1];
      if (!joined) {
        out.axes.push_back(std::move(run));
        run = AxisExp();
      }
    }
  }
  return out;
}

}  // namespace

NormalizedRank NormalizeRank(const AxisSpace& space, const SymLayoutExpr& base,
                             const SymLayoutExpr& dist) {
  NormalizedRank out;
  std::vector<std::vector<int>> b = NonUnitLeafDims(space, base);
  std::vector<std::vector<int>> d = NonUnitLeafDims(space, dist);
  std::vector<int> b_atoms, d_atoms;
  for (const auto& dim : b)
    b_atoms.insert(b_atoms.end(), dim.begin(), dim.end());
  for (const auto& dim : d)
    d_atoms.insert(d_atoms.end(), dim.begin(), dim.end());
  std::vector<int> b_sorted = b_atoms, d_sorted = d_atoms;
  std::sort(b_sorted.begin(), b_sorted.end());
  std::sort(d_sorted.begin(), d_sorted.end());
  if (b_sorted != d_sorted ||
      std::adjacent_find(b_sorted.begin(), b_sorted.end()) != b_sorted.end()) {
    out.impossible = true;
    return out;
  }
  absl::flat_hash_map<int, int> b_next = Successors(b);
  absl::flat_hash_map<int, int> d_next = Successors(d);
  absl::flat_hash_map<int, int> shared;
  for (const auto& [a, n] : b_next) {
    auto it = d_next.find(a);
    if (it != d_next.end() && it->second == n) shared[a] = n;
  }
  out.base = CutRuns(b, shared);
  out.dist = CutRuns(d, shared);
  return out;
}

PermutationResult FindPermutation(const AxisSpace& space,
                                  const SymLayoutExpr& base,
                                  const SymLayoutExpr& dist) {
  PermutationResult out;
  if (base.rank() != dist.rank()) return out;
  std::vector<std::vector<int>> d_leaves = dist.LeafDims(space);
  std::vector<bool> used(dist.rank(), false);
  std::vector<int64_t> perm;
  for (const AxisExp& b : base.axes) {
    std::vector<int> leaves = b.Leaves(space);
    int64_t chosen = -1;
    int matches = 0;
    for (int64_t j = 0; j < dist.rank(); ++j) {
      if (used[j] || d_leaves[j] != leaves) continue;
      ++matches;
      if (chosen < 0) chosen = j;
    }
    if (chosen < 0) return out;
    if (matches > 1) out.ambiguous = true;
    used[chosen] = true;
    perm.push_back(chosen);
  }
  out.perm = std::move(perm);
  return out;
}

namespace {

constexpr int64_t kPrimes[] = {2, 3, 5, 7, 11, 13};
constexpr int64_t kMaxSurrogateElements = int64_t{1} << 20;

class Surrogate {
 public:
  Surrogate(const AxisSpace& space, const SymLayoutExpr& order)
      : space_(space) {
    for (const AxisExp& a : order.axes) {
      for (int leaf : a.Leaves(space)) Assign(leaf);
    }
  }

  void Assign(int leaf) {
    if (extent_.contains(leaf)) return;
    int64_t e = 1;
    if (space_.extent(leaf) != 1) {
      e = next_ < 6 ? kPrimes[next_] : 2;
      ++next_;
    }
    extent_[leaf] = e;
  }

  Shape Of(const SymLayoutExpr& e) {
    std::vector<int64_t> dims;
    for (const AxisExp& a : e.axes) {
      int64_t d = 1;
      for (int leaf : a.Leaves(space_)) {
        Assign(leaf);
        d *= extent_[leaf];
      }
      dims.push_back(d);
    }
    return Shape(std::move(dims));
  }

 private:
  const AxisSpace& space_;
  absl::flat_hash_map<int, int64_t> extent_;
  int next_ = 0;
};

// Replays `seq` from `start` and rewrites each reshape target at surrogate
// extents. Fails if the replay would need to split an atom again.
absl::StatusOr<LayoutTerm> SurrogateSeq(AxisSpace& space, Surrogate& sur,
                                        const SymLayoutExpr& start,
                                        const LayoutTerm& seq) {
  std::vector<LayoutPrim> prims;
  SymLayoutExpr cur = start;
  for (const LayoutPrim& p : seq.prims()) {
    const int before = space.size();
    absl::StatusOr<SymLayoutExpr> next = GenExp(space, cur, LayoutTerm({p}));
    if (!next.ok()) return next.status();
    if (space.size() != before) {
      return absl::InternalError("surrogate replay refined atoms");
    }
    if (p.kind == LayoutPrim::Kind::kTranspose) {
      prims.push_back(p);
    } else {
      prims.push_back(LayoutPrim::Reshape(sur.Of(*next)));
    }
    cur = *std::move(next);
  }
  return LayoutTerm(std::move(prims));
}

}  // namespace

BijectionResult InferBijection(const LayoutTerm& l, const LayoutTerm& s_b,
                               const LayoutTerm& s_d, const Shape& shape_b,
                               const Shape& shape_d) {
  BijectionResult result;
  auto bottom = [&](std::string why) {
    result.bottom = true;
    result.ops = LayoutTerm();
    result.reason = std::move(why);
    return result;
  };

  // Step 1: axis map and symbolic expressions for both paths.
  AxisSpace space;
  absl::StatusOr<ExtractedAxes> ex = ExtractAxisMap(space, l, shape_b, shape_d);
  if (!ex.ok()) return bottom(std::string(ex.status().message()));
  absl::StatusOr<SymLayoutExpr> e_b = GenExp(space, ex->base, s_b);
  if (!e_b.ok()) {
    return bottom(absl::StrCat("baseline path: ", e_b.status().message()));
  }
  absl::StatusOr<SymLayoutExpr> e_d = GenExp(space, ex->dist, s_d);
  if (!e_d.ok()) {
    return bottom(absl::StrCat("distributed path: ", e_d.status().message()));
  }
  result.axis_map = ex->map.ToString(space);

  // Step 2: rank normalization.
  NormalizedRank norm = NormalizeRank(space, *e_b, *e_d);
  if (norm.impossible) return bottom("rank normalization impossible");
  result.base_expr = norm.base.ToString(space, Side::kBaseline);
  result.dist_expr = norm.dist.ToString(space, Side::kDistributed);

  // Step 3: permutation.
  PermutationResult pr = FindPermutation(space, norm.base, norm.dist);
  if (!pr.perm.has_value()) return bottom("no matching axis permutation");
  result.perm = *pr.perm;
  result.ambiguous = pr.ambiguous;

  // Step 4: operation sequence.
  const Shape d_term = e_d->shape(space);
  const Shape b_term = e_b->shape(space);
  const Shape d_hat = norm.dist.shape(space);
  const Shape b_hat = norm.base.shape(space);
  bool identity_perm = true;
  for (size_t i = 0; i < result.perm.size(); ++i) {
    if (result.perm[i] != static_cast<int64_t>(i)) identity_perm = false;
  }
  std::vector<LayoutPrim> ops;
  // Same sequence at surrogate extents; kLead/kTrail mark the reshape targets.
  enum class Piece { kLead, kTranspose, kTrail };
  std::vector<Piece> pieces;
  bool lead = d_hat != d_term;
  bool trail = b_hat != b_term;
  if (identity_perm && lead && trail) {
    // Both reshapes collapse into one.
    ops.push_back(LayoutPrim::Reshape(b_term));
    pieces.push_back(Piece::kTrail);
  } else {
    if (lead) {
      ops.push_back(LayoutPrim::Reshape(d_hat));
      pieces.push_back(Piece::kLead);
    }
    if (!identity_perm) {
      ops.push_back(LayoutPrim::Transpose(result.perm));
      pieces.push_back(Piece::kTranspose);
    }
    if (trail) {
      ops.push_back(LayoutPrim::Reshape(b_term));
      pieces.push_back(Piece::kTrail);
    }
  }
  result.ops = LayoutTerm(ops);

  // Verification at surrogate extents.
  Surrogate sur(space, ex->dist);
  absl::StatusOr<LayoutTerm> l_sur = SurrogateSeq(space, sur, ex->dist, l);
  absl::StatusOr<LayoutTerm> sb_sur = SurrogateSeq(space, sur, ex->base, s_b);
  absl::StatusOr<LayoutTerm> sd_sur = SurrogateSeq(space, sur, ex->dist, s_d);
  if (!l_sur.ok() || !sb_sur.ok() || !sd_sur.ok()) {
    return bottom("surrogate replay failed");
  }
  const Shape d_sur = sur.Of(ex->dist);
  const Shape d_term_sur = sur.Of(*e_d);
  if (d_sur.NumElements() > kMaxSurrogateElements) {
    return bottom("surrogate index space too large to verify");
  }
  std::vector<LayoutPrim> ops_sur;
  for (size_t i = 0; i < ops.size(); ++i) {
    switch (pieces[i]) {
      case Piece::kLead:
        ops_sur.push_back(LayoutPrim::Reshape(sur.Of(norm.dist)));
        break;
      case Piece::kTranspose:
        ops_sur.push_back(ops[i]);
        break;
      case Piece::kTrail:
        ops_sur.push_back(LayoutPrim::Reshape(sur.Of(*e_b)));
        break;
    }
  }
  absl::StatusOr<LayoutTerm> undo_d = Invert(*sd_sur, d_sur);
  if (!undo_d.ok()) return bottom("surrogate inversion failed");
  LayoutTerm expected = Compose(Compose(*undo_d, *l_sur), *sb_sur);
  absl::StatusOr<std::vector<int64_t>> want =
      ApplyToIndices(expected, d_term_sur);
  absl::StatusOr<std::vector<int64_t>> got =
      ApplyToIndices(LayoutTerm(ops_sur), d_term_sur);
  absl::StatusOr<Shape> want_shape = OutputShape(expected, d_term_sur);
  absl::StatusOr<Shape> got_shape =
      OutputShape(LayoutTerm(ops_sur), d_term_sur);
  if (!want.ok() || !got.ok() || !want_shape.ok() || !got_shape.ok() ||
      *want != *got || *want_shape != *got_shape) {
    return bottom("index-level verification rejected the bijection");
  }
  return result;
}

}  // namespace graphcheck
