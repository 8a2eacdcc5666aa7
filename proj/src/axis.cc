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

#include "graphcheck/axis.h"

#include <algorithm>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace graphcheck {

std::string SymAxis::ToString() const {
  return side == Side::kDistributed ? absl::StrCat(name, "'") : name;
}

int AxisSpace::NewAtom(std::string name, int64_t extent) {
  std::string dist = name;
  atoms_.push_back({std::move(name), std::move(dist), extent, {}});
  return static_cast<int>(atoms_.size()) - 1;
}

void AxisSpace::Rename(int atom, std::string name) {
  atoms_[atom].name = std::move(name);
  if (!atoms_[atom].children.empty()) {
    const std::vector<int> children = atoms_[atom].children;
    for (size_t i = 0; i < children.size(); ++i) {
      Rename(children[i], absl::StrCat(atoms_[atom].name, "_", i + 1));
    }
  }
}

std::pair<int, int> AxisSpace::Split(int atom, int64_t major) {
  const std::string base = atoms_[atom].name;
  const std::string dist = atoms_[atom].dist_name;
  const int64_t minor = atoms_[atom].extent / major;
  int hi = NewAtom(absl::StrCat(base, "_1"), major);
  int lo = NewAtom(absl::StrCat(base, "_2"), minor);
  atoms_[hi].dist_name = absl::StrCat(dist, "_1");
  atoms_[lo].dist_name = absl::StrCat(dist, "_2");
  atoms_[atom].children = {hi, lo};
  return {hi, lo};
}

std::vector<int> AxisSpace::Leaves(int atom) const {
  if (atoms_[atom].children.empty()) return {atom};
  std::vector<int> out;
  for (int c : atoms_[atom].children) {
    std::vector<int> sub = Leaves(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

int64_t AxisExp::Extent(const AxisSpace& space) const {
  int64_t e = 1;
  for (int a : atoms) e *= space.extent(a);
  return e;
}

std::vector<int> AxisExp::Leaves(const AxisSpace& space) const {
  std::vector<int> out;
  for (int a : atoms) {
    std::vector<int> sub = space.Leaves(a);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::vector<SymAxis> AxisExp::View(const AxisSpace& space, Side side) const {
  std::vector<SymAxis> out;
  for (int a : Leaves(space)) {
    out.push_back({space.name(a), side, space.extent(a)});
  }
  return out;
}

std::string AxisExp::ToString(const AxisSpace& space, Side side) const {
  std::vector<SymAxis> view = View(space, side);
  if (view.empty()) return "1";
  std::string out = view[0].ToString();
  for (size_t i = 1; i < view.size(); ++i) {
    out = absl::StrCat("⊗(", out, ",", view[i].ToString(), ")");
  }
  return out;
}

Shape SymLayoutExpr::shape(const AxisSpace& space) const {
  std::vector<int64_t> dims;
  for (const AxisExp& a : axes) dims.push_back(a.Extent(space));
  return Shape(std::move(dims));
}

std::vector<std::vector<int>> SymLayoutExpr::LeafDims(
    const AxisSpace& space) const {
  std::vector<std::vector<int>> out;
  for (const AxisExp& a : axes) out.push_back(a.Leaves(space));
  return out;
}

std::string SymLayoutExpr::ToString(const AxisSpace& space, Side side) const {
  return absl::StrCat("(",
                      absl::StrJoin(axes, ",",
                                    [&](std::string* out, const AxisExp& a) {
                                      absl::StrAppend(out,
                                                      a.ToString(space, side));
                                    }),
                      ")");
}

namespace {

std::string AxisLetter(int64_t i) {
  static constexpr char kLetters[] = "ijklmnopqrstuvwxyz";
  if (i < 18) return std::string(1, kLetters[i]);
  return absl::StrCat("a", i);
}

}  // namespace

SymLayoutExpr FreshAxes(AxisSpace& space, const Shape& shape) {
  SymLayoutExpr e;
  for (int64_t i = 0; i < shape.rank(); ++i) {
    e.axes.push_back({{space.NewAtom(AxisLetter(i), shape[i])}});
  }
  return e;
}

absl::StatusOr<SymLayoutExpr> GenExp(AxisSpace& space,
                                     const SymLayoutExpr& start,
                                     const LayoutTerm& seq) {
  SymLayoutExpr cur = start;
  for (size_t step = 0; step < seq.prims().size(); ++step) {
    const LayoutPrim& p = seq.prims()[step];
    auto non_grouping = [&]() {
      return absl::UnimplementedError(
          absl::StrCat("NonGroupingReshape(", step, ")"));
    };
    if (p.kind == LayoutPrim::Kind::kTranspose) {
      if (static_cast<int64_t>(p.perm.size()) != cur.rank()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "ShapeMismatch: ", p.ToString(), " on rank ", cur.rank()));
      }
      SymLayoutExpr next;
      for (int64_t d : p.perm) next.axes.push_back(cur.axes[d]);
      cur = std::move(next);
      continue;
    }
    if (p.target.NumElements() != cur.shape(space).NumElements()) {
      return absl::InvalidArgumentError(
          absl::StrCat("ShapeMismatch: ", p.ToString(), " on ",
                       cur.shape(space).ToString()));
    }
    std::vector<int> flat;
    for (const AxisExp& a : cur.axes) {
      std::vector<int> leaves = a.Leaves(space);
      flat.insert(flat.end(), leaves.begin(), leaves.end());
    }
    SymLayoutExpr next;
    size_t idx = 0;
    for (int64_t t : p.target.dims) {
      AxisExp group;
      int64_t rem = t;
      while (rem > 1) {
        if (idx >= flat.size()) return non_grouping();
        int a = flat[idx];
        int64_t e = space.extent(a);
        if (e == 1) {
          group.atoms.push_back(a);
          ++idx;
        } else if (e <= rem) {
          if (rem % e != 0) return non_grouping();
          group.atoms.push_back(a);
          rem /= e;
          ++idx;
        } else {
          if (e % rem != 0) return non_grouping();
          auto [hi, lo] = space.Split(a, rem);
          flat[idx] = lo;
          group.atoms.push_back(hi);
          rem = 1;
        }
      }
      next.axes.push_back(std::move(group));
    }
    for (; idx < flat.size(); ++idx) {
      if (space.extent(flat[idx]) != 1) return non_grouping();
      if (!next.axes.empty()) next.axes.back().atoms.push_back(flat[idx]);
    }
    cur = std::move(next);
  }
  return cur;
}

bool AxisMap::Consistent(const AxisSpace& space) const {
  absl::flat_hash_set<int> base_seen, dist_seen;
  for (const AxisPair& p : pairs) {
    if (p.base.Extent(space) != p.dist.Extent(space)) return false;
    for (int a : p.base.Leaves(space)) {
      if (!base_seen.insert(a).second) return false;
    }
    for (int a : p.dist.Leaves(space)) {
      if (!dist_seen.insert(a).second) return false;
    }
  }
  return true;
}

std::string AxisMap::ToString(const AxisSpace& space) const {
  return absl::StrCat(
      "{",
      absl::StrJoin(pairs, ", ",
                    [&](std::string* out, const AxisPair& p) {
                      std::vector<int> leaves = p.dist.Leaves(space);
                      std::string dist =
                          leaves.empty()
                              ? "1"
                              : absl::StrCat(space.dist_name(leaves[0]), "'");
                      for (size_t i = 1; i < leaves.size(); ++i) {
                        dist = absl::StrCat("⊗(", dist, ",",
                                            space.dist_name(leaves[i]), "')");
                      }
                      absl::StrAppend(out,
                                      p.base.ToString(space, Side::kBaseline),
                                      "↔", dist);
                    }),
      "}");
}

absl::StatusOr<ExtractedAxes> ExtractAxisMap(AxisSpace& space,
                                             const LayoutTerm& l,
                                             const Shape& shape_b,
                                             const Shape& shape_d) {
  ExtractedAxes out;
  out.dist = FreshAxes(space, shape_d);
  absl::StatusOr<SymLayoutExpr> pushed = GenExp(space, out.dist, l);
  if (!pushed.ok()) return pushed.status();
  if (pushed->shape(space) != shape_b) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ShapeMismatch: layout ", l.ToString(), " maps ", shape_d.ToString(),
        " to ", pushed->shape(space).ToString(), ", expected ",
        shape_b.ToString()));
  }
  // Name atoms after the baseline dims they land on.
  for (int64_t m = 0; m < pushed->rank(); ++m) {
    std::vector<int> leaves = pushed->axes[m].Leaves(space);
    std::vector<int> real;
    for (int a : leaves) {
      if (space.extent(a) != 1) real.push_back(a);
    }
    if (real.empty()) real = leaves;
    for (size_t q = 0; q < real.size(); ++q) {
      space.Rename(real[q], real.size() == 1
                                ? AxisLetter(m)
                                : absl::StrCat(AxisLetter(m), "_", q + 1));
    }
  }
  out.base = *std::move(pushed);
  for (const AxisExp& b : out.base.axes) {
    out.map.pairs.push_back({b, b});
  }
  return out;
}

}  // namespace graphcheck
