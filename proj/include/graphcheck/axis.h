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

#ifndef GRAPHCHECK_AXIS_H_
#define GRAPHCHECK_AXIS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "graphcheck/ir.h"
#include "graphcheck/layout.h"

namespace graphcheck {

enum class Side { kBaseline, kDistributed };

// A symbolic axis as seen from one side. Distributed names carry a prime.
struct SymAxis {
  std::string name;
  Side side = Side::kBaseline;
  int64_t extent = 1;

  std::string ToString() const;  // "i" or "i'"
  friend bool operator==(const SymAxis&, const SymAxis&) = default;
};

// Owns the atomic axes shared by both sides of one inference. Correspondence
// under the axis map is identity of atoms. Each atom has a baseline name and
// the name it was created with on the distributed side; expressions print
// baseline names (primed on the distributed side) so aligned axes read alike,
// while AxisMap shows the native distributed names. Splitting an atom refines
// it everywhere it is referenced.
class AxisSpace {
 public:
  int NewAtom(std::string name, int64_t extent);
  int64_t extent(int atom) const { return atoms_[atom].extent; }
  const std::string& name(int atom) const { return atoms_[atom].name; }
  const std::string& dist_name(int atom) const {
    return atoms_[atom].dist_name;
  }
  // Sets the baseline name; split children follow as "<name>_1", "<name>_2".
  void Rename(int atom, std::string name);
  bool IsLeaf(int atom) const { return atoms_[atom].children.empty(); }

  // Splits a leaf atom into a major part of extent `major` and the remainder.
  // Children are named "<name>_1" and "<name>_2".
  std::pair<int, int> Split(int atom, int64_t major);

  // Current leaves of an atom, major to minor.
  std::vector<int> Leaves(int atom) const;
  int size() const { return static_cast<int>(atoms_.size()); }

 private:
  struct Atom {
    std::string name;
    std::string dist_name;
    int64_t extent;
    std::vector<int> children;
  };
  std::vector<Atom> atoms_;
};

// ⊗ of one or more atoms, left-associated. Extent is the product.
struct AxisExp {
  std::vector<int> atoms;

  int64_t Extent(const AxisSpace& space) const;
  std::vector<int> Leaves(const AxisSpace& space) const;
  // Axes as seen from `side`; one element for an unmerged axis.
  std::vector<SymAxis> View(const AxisSpace& space, Side side) const;
  // "i", "⊗(i,j)", "⊗(⊗(i,j),k)".
  std::string ToString(const AxisSpace& space, Side side) const;

  friend bool operator==(const AxisExp&, const AxisExp&) = default;
};

// Symbolic form of one tensor: one AxisExp per dim.
struct SymLayoutExpr {
  std::vector<AxisExp> axes;

  int64_t rank() const { return static_cast<int64_t>(axes.size()); }
  Shape shape(const AxisSpace& space) const;
  // Dims as leaf lists, so refinements made later compare equal.
  std::vector<std::vector<int>> LeafDims(const AxisSpace& space) const;
  std::string ToString(const AxisSpace& space,
                       Side side) const;  // "(⊗(i,j),k)"
};

// One fresh atom per dim, named i, j, k, l, m, n, ... in order (a0, a1, ...
// beyond the alphabet run).
SymLayoutExpr FreshAxes(AxisSpace& space, const Shape& shape);

// Pushes `start` through `seq`: transposes permute the axis list (merged
// groups move atomically), reshapes merge adjacent axes with ⊗ or split an
// axis into fresh sub-axes. Returns Unimplemented "NonGroupingReshape(k)" when
// step k is neither a pure merge nor a pure split of the current axes.
absl::StatusOr<SymLayoutExpr> GenExp(AxisSpace& space,
                                     const SymLayoutExpr& start,
                                     const LayoutTerm& seq);

struct AxisPair {
  AxisExp base;
  AxisExp dist;
};

// Correspondence between baseline and distributed axis expressions. Pairs
// refer to atoms of `space`.
struct AxisMap {
  std::vector<AxisPair> pairs;

  // Each side of each pair appears at most once; extents agree.
  bool Consistent(const AxisSpace& space) const;
  // Baseline names against native distributed names: "{i↔j', j↔i', k↔k'}".
  std::string ToString(const AxisSpace& space) const;
};

// Result of mapping the axes of two tensors related by layout(b, d, l).
struct ExtractedAxes {
  AxisMap map;
  SymLayoutExpr base;  // b's dims over the shared atoms
  SymLayoutExpr dist;  // d's dims over the shared atoms
};

// Fresh atoms for d are pushed through l onto b's dims; atoms are then named
// after b's dims (i, j, ...; i_1, i_2 when one b dim gathers several atoms).
absl::StatusOr<ExtractedAxes> ExtractAxisMap(AxisSpace& space,
                                             const LayoutTerm& l,
                                             const Shape& shape_b,
                                             const Shape& shape_d);

}  // namespace graphcheck

#endif  // GRAPHCHECK_AXIS_H_
