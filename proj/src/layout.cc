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

#include <algorithm>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace graphcheck {

LayoutPrim LayoutPrim::Transpose(std::vector<int64_t> perm) {
  LayoutPrim p;
  p.kind = Kind::kTranspose;
  p.perm = std::move(perm);
  return p;
}

LayoutPrim LayoutPrim::Reshape(Shape target) {
  LayoutPrim p;
  p.kind = Kind::kReshape;
  p.target = std::move(target);
  return p;
}

std::string LayoutPrim::ToString() const {
  if (kind == Kind::kTranspose) {
    return absl::StrCat("transpose(", absl::StrJoin(perm, ","), ")");
  }
  return absl::StrCat("reshape", target.ToString());
}

LayoutTerm LayoutTerm::Transpose(std::vector<int64_t> perm) {
  return LayoutTerm({LayoutPrim::Transpose(std::move(perm))});
}

LayoutTerm LayoutTerm::Reshape(Shape target) {
  return LayoutTerm({LayoutPrim::Reshape(std::move(target))});
}

LayoutTerm LayoutTerm::Bijection(Shape s1, std::vector<int64_t> perm,
                                 Shape s2) {
  return LayoutTerm({LayoutPrim::Reshape(std::move(s1)),
                     LayoutPrim::Transpose(std::move(perm)),
                     LayoutPrim::Reshape(std::move(s2))});
}

std::string LayoutTerm::ToString() const {
  return absl::StrCat("[",
                      absl::StrJoin(prims_, ", ",
                                    [](std::string* out, const LayoutPrim& p) {
                                      absl::StrAppend(out, p.ToString());
                                    }),
                      "]");
}

namespace {

bool IsIdentityPerm(absl::Span<const int64_t> perm) {
  for (size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != static_cast<int64_t>(i)) return false;
  }
  return true;
}

bool IsPermutation(absl::Span<const int64_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (int64_t p : perm) {
    if (p < 0 || p >= static_cast<int64_t>(perm.size()) || seen[p]) {
      return false;
    }
    seen[p] = true;
  }
  return true;
}

absl::StatusOr<Shape> Step(const LayoutPrim& p, const Shape& in) {
  if (p.kind == LayoutPrim::Kind::kTranspose) {
    if (static_cast<int64_t>(p.perm.size()) != in.rank() ||
        !IsPermutation(p.perm)) {
      return absl::InvalidArgumentError(
          absl::StrCat("ShapeMismatch: ", p.ToString(), " on ", in.ToString()));
    }
    std::vector<int64_t> out;
    for (int64_t d : p.perm) out.push_back(in[d]);
    return Shape(std::move(out));
  }
  if (p.target.NumElements() != in.NumElements()) {
    return absl::InvalidArgumentError(
        absl::StrCat("ShapeMismatch: ", p.ToString(), " on ", in.ToString()));
  }
  return p.target;
}

}  // namespace

LayoutTerm Compose(const LayoutTerm& first, const LayoutTerm& second) {
  std::vector<LayoutPrim> out;
  auto push = [&](const LayoutPrim& p) {
    if (p.kind == LayoutPrim::Kind::kTranspose) {
      if (!out.empty() && out.back().kind == LayoutPrim::Kind::kTranspose &&
          out.back().perm.size() == p.perm.size()) {
        std::vector<int64_t> fused(p.perm.size());
        for (size_t i = 0; i < p.perm.size(); ++i) {
          fused[i] = out.back().perm[p.perm[i]];
        }
        out.pop_back();
        if (!IsIdentityPerm(fused)) {
          out.push_back(LayoutPrim::Transpose(std::move(fused)));
        }
        return;
      }
      if (IsIdentityPerm(p.perm)) return;
      out.push_back(p);
      return;
    }
    if (!out.empty() && out.back().kind == LayoutPrim::Kind::kReshape) {
      out.back().target = p.target;
      return;
    }
    out.push_back(p);
  };
  for (const LayoutPrim& p : first.prims()) push(p);
  for (const LayoutPrim& p : second.prims()) push(p);
  return LayoutTerm(std::move(out));
}

absl::StatusOr<LayoutTerm> ComposeChecked(const LayoutTerm& first,
                                          const LayoutTerm& second,
                                          const Shape& in) {
  absl::StatusOr<Shape> mid = OutputShape(first, in);
  if (!mid.ok()) return mid.status();
  absl::StatusOr<Shape> out = OutputShape(second, *mid);
  if (!out.ok()) return out.status();
  return Compose(first, second);
}

absl::StatusOr<Shape> OutputShape(const LayoutTerm& l, const Shape& in) {
  Shape cur = in;
  for (const LayoutPrim& p : l.prims()) {
    absl::StatusOr<Shape> next = Step(p, cur);
    if (!next.ok()) return next.status();
    cur = *std::move(next);
  }
  return cur;
}

absl::StatusOr<std::vector<int64_t>> ApplyToIndices(const LayoutTerm& l,
                                                    const Shape& in) {
  std::vector<int64_t> table(in.NumElements());
  std::iota(table.begin(), table.end(), 0);
  Shape cur = in;
  for (const LayoutPrim& p : l.prims()) {
    absl::StatusOr<Shape> next = Step(p, cur);
    if (!next.ok()) return next.status();
    if (p.kind == LayoutPrim::Kind::kTranspose) {
      const int64_t rank = cur.rank();
      std::vector<int64_t> in_stride(rank, 1);
      for (int64_t i = rank - 2; i >= 0; --i) {
        in_stride[i] = in_stride[i + 1] * cur[i + 1];
      }
      std::vector<int64_t> idx(rank, 0);
      std::vector<int64_t> gathered(table.size());
      for (size_t k = 0; k < table.size(); ++k) {
        int64_t src = 0;
        for (int64_t i = 0; i < rank; ++i) src += idx[i] * in_stride[p.perm[i]];
        gathered[k] = table[src];
        for (int64_t i = rank - 1; i >= 0; --i) {
          if (++idx[i] < (*next)[i]) break;
          idx[i] = 0;
        }
      }
      table = std::move(gathered);
    }
    cur = *std::move(next);
  }
  return table;
}

absl::StatusOr<LayoutTerm> Invert(const LayoutTerm& l, const Shape& in) {
  std::vector<LayoutPrim> inverse;
  Shape cur = in;
  for (const LayoutPrim& p : l.prims()) {
    absl::StatusOr<Shape> next = Step(p, cur);
    if (!next.ok()) return next.status();
    if (p.kind == LayoutPrim::Kind::kTranspose) {
      inverse.push_back(LayoutPrim::Transpose(InvertPermutation(p.perm)));
    } else {
      inverse.push_back(LayoutPrim::Reshape(cur));
    }
    cur = *std::move(next);
  }
  std::reverse(inverse.begin(), inverse.end());
  return LayoutTerm(std::move(inverse));
}

std::vector<int64_t> InvertPermutation(absl::Span<const int64_t> p) {
  std::vector<int64_t> inv(p.size());
  for (size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int64_t>(i);
  return inv;
}

namespace {

// Tracks a tensor view as dims made of atoms, refining atoms on splits so
// that the input view stays expressed over the same atoms.
class AtomTracker {
 public:
  explicit AtomTracker(const Shape& in) {
    for (int64_t d : in.dims) {
      input_.push_back({NewAtom(d)});
    }
    view_ = input_;
  }

  bool Transpose(absl::Span<const int64_t> perm) {
    if (static_cast<int64_t>(perm.size()) !=
            static_cast<int64_t>(view_.size()) ||
        !IsPermutation(perm)) {
      return false;
    }
    std::vector<std::vector<int>> next;
    for (int64_t p : perm) next.push_back(view_[p]);
    view_ = std::move(next);
    return true;
  }

  bool Reshape(const Shape& target) {
    std::vector<int> flat;
    for (const auto& d : view_) flat.insert(flat.end(), d.begin(), d.end());
    std::vector<std::vector<int>> next;
    size_t idx = 0;
    for (int64_t t : target.dims) {
      std::vector<int> group;
      int64_t rem = t;
      while (rem > 1) {
        if (idx >= flat.size()) return false;
        int a = flat[idx];
        int64_t e = extent_[a];
        if (e == 1) {
          group.push_back(a);
          ++idx;
        } else if (e <= rem) {
          if (rem % e != 0) return false;
          group.push_back(a);
          rem /= e;
          ++idx;
        } else {
          if (e % rem != 0) return false;
          auto [hi, lo] = Split(a, rem);
          flat[idx] = lo;
          group.push_back(hi);
          rem = 1;
        }
      }
      next.push_back(std::move(group));
    }
    for (; idx < flat.size(); ++idx) {
      if (extent_[flat[idx]] != 1) return false;
      if (!next.empty()) next.back().push_back(flat[idx]);
    }
    view_ = std::move(next);
    return true;
  }

  // Emits the normal form for an output of shape `out`.
  LayoutTerm Emit(const Shape& in, const Shape& out) const {
    std::vector<int> in_flat, out_flat;
    for (const auto& d : input_) {
      for (int a : d) {
        if (extent_[a] != 1) in_flat.push_back(a);
      }
    }
    for (const auto& d : view_) {
      for (int a : d) {
        if (extent_[a] != 1) out_flat.push_back(a);
      }
    }
    std::vector<int> in_pos(extent_.size(), -1);
    for (size_t i = 0; i < in_flat.size(); ++i) in_pos[in_flat[i]] = i;
    // Segments: maximal runs consecutive in both orders.
    std::vector<int> seg_of(extent_.size(), -1);
    std::vector<int64_t> seg_extent;
    std::vector<int> seg_first_in;  // input position of each segment head
    for (size_t k = 0; k < out_flat.size(); ++k) {
      int a = out_flat[k];
      if (k > 0 && in_pos[a] == in_pos[out_flat[k - 1]] + 1) {
        seg_of[a] = seg_of[out_flat[k - 1]];
        seg_extent[seg_of[a]] *= extent_[a];
      } else {
        seg_of[a] = static_cast<int>(seg_extent.size());
        seg_extent.push_back(extent_[a]);
        seg_first_in.push_back(in_pos[a]);
      }
    }
    // Segment order in the input, by head position.
    std::vector<int> by_input(seg_extent.size());
    std::iota(by_input.begin(), by_input.end(), 0);
    std::sort(by_input.begin(), by_input.end(),
              [&](int x, int y) { return seg_first_in[x] < seg_first_in[y]; });
    std::vector<int64_t> input_rank_of(seg_extent.size());
    std::vector<int64_t> s1;
    for (size_t i = 0; i < by_input.size(); ++i) {
      input_rank_of[by_input[i]] = static_cast<int64_t>(i);
      s1.push_back(seg_extent[by_input[i]]);
    }
    std::vector<int64_t> perm;
    for (size_t s = 0; s < seg_extent.size(); ++s) {
      perm.push_back(input_rank_of[s]);
    }
    std::vector<LayoutPrim> prims;
    if (IsIdentityPerm(perm)) {
      if (out != in) prims.push_back(LayoutPrim::Reshape(out));
      return LayoutTerm(std::move(prims));
    }
    Shape s1_shape(s1);
    if (s1_shape != in) prims.push_back(LayoutPrim::Reshape(s1_shape));
    std::vector<int64_t> permuted;
    for (int64_t p : perm) permuted.push_back(s1[p]);
    prims.push_back(LayoutPrim::Transpose(perm));
    if (Shape(permuted) != out) prims.push_back(LayoutPrim::Reshape(out));
    return LayoutTerm(std::move(prims));
  }

 private:
  int NewAtom(int64_t extent) {
    extent_.push_back(extent);
    return static_cast<int>(extent_.size()) - 1;
  }

  std::pair<int, int> Split(int a, int64_t hi_extent) {
    int hi = NewAtom(hi_extent);
    int lo = NewAtom(extent_[a] / hi_extent);
    for (auto* view : {&input_, &view_}) {
      for (auto& d : *view) {
        auto it = std::find(d.begin(), d.end(), a);
        if (it != d.end()) {
          it = d.erase(it);
          d.insert(it, {hi, lo});
        }
      }
    }
    return {hi, lo};
  }

  std::vector<int64_t> extent_;
  std::vector<std::vector<int>> input_;
  std::vector<std::vector<int>> view_;
};

}  // namespace

absl::StatusOr<LayoutTerm> NormalizeLayout(const LayoutTerm& l,
                                           const Shape& in) {
  absl::StatusOr<Shape> out = OutputShape(l, in);
  if (!out.ok()) return out.status();
  AtomTracker tracker(in);
  for (size_t i = 0; i < l.prims().size(); ++i) {
    const LayoutPrim& p = l.prims()[i];
    bool ok = p.kind == LayoutPrim::Kind::kTranspose
                  ? tracker.Transpose(p.perm)
                  : tracker.Reshape(p.target);
    if (!ok) {
      return absl::UnimplementedError(
          absl::StrCat("NonGroupingReshape at step ", i, " of ", l.ToString()));
    }
  }
  return tracker.Emit(in, *out);
}

LayoutTerm CanonicalLayout(const LayoutTerm& l, const Shape& in) {
  absl::StatusOr<LayoutTerm> n = NormalizeLayout(l, in);
  if (n.ok()) return *std::move(n);
  return Compose(LayoutTerm(), l);
}

bool IsIdentityOn(const LayoutTerm& l, const Shape& in) {
  absl::StatusOr<Shape> out = OutputShape(l, in);
  if (!out.ok() || *out != in) return false;
  absl::StatusOr<LayoutTerm> n = NormalizeLayout(l, in);
  if (n.ok()) return n->empty();
  constexpr int64_t kMaxEnumerated = int64_t{1} << 22;
  if (in.NumElements() > kMaxEnumerated) return false;
  absl::StatusOr<std::vector<int64_t>> table = ApplyToIndices(l, in);
  if (!table.ok()) return false;
  for (size_t k = 0; k < table->size(); ++k) {
    if ((*table)[k] != static_cast<int64_t>(k)) return false;
  }
  return true;
}

bool IsGroupingReshape(const Shape& from, const Shape& to) {
  if (from.NumElements() != to.NumElements()) return false;
  std::set<int64_t> cuts;
  for (int64_t i = 0; i <= from.rank(); ++i) cuts.insert(from.PrefixProduct(i));
  for (int64_t i = 0; i <= to.rank(); ++i) cuts.insert(to.PrefixProduct(i));
  int64_t prev = 1;
  for (int64_t c : cuts) {
    if (c % prev != 0) return false;
    prev = c;
  }
  return true;
}

}  // namespace graphcheck
