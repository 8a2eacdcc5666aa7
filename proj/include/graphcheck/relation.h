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

#ifndef GRAPHCHECK_RELATION_H_
#define GRAPHCHECK_RELATION_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "graphcheck/ir.h"
#include "graphcheck/layout.h"

namespace graphcheck {

// Identifies an e-class. Canonical ids are union-find representatives.
using ClassId = int32_t;

enum class FactKind {
  kSharded,
  kDuplicate,
  kLayout,
  kPartial,
  kSlice,
  kLoopRedB,
  kLoopRedD,
};

absl::string_view FactKindName(FactKind kind);

// Rank value meaning "every rank of the group".
inline constexpr int64_t kAllRanks = -1;

// One slice of a loop reduction: the baseline slice class and its interval
// along the reduction dim.
struct SliceRef {
  ClassId cls = -1;
  int64_t offset = 0;
  int64_t length = 0;

  friend bool operator==(const SliceRef&, const SliceRef&) = default;
  friend auto operator<=>(const SliceRef&, const SliceRef&) = default;
};

// A relation between a baseline e-class t and a distributed e-class tp.
// Fields unused by a kind keep their defaults.
//
//   sharded(t, tp, dim, group)      rank at position i of group holds chunk i
//   duplicate(t, tp, group)         every rank of group holds t
//   layout(t, tp, layout, group)    t = layout(tp) on every rank of group
//   partial(t, tp, group, op, layout)
//                                   t = layout(op-reduction of tp over group)
//   slice(t, tp, rank, base, dim, offset, length)
//                                   t = tp is base[offset, offset+length)
//                                   along dim; tp lives on rank
//   loop_red_B(op, dim, t, ts, base)
//                                   t is the op-reduction of slices ts of base
//   loop_red_D(op, dim, tp, ts, base, rank)
//                                   tp is the op-reduction of the baseline
//                                   slices ts, held on rank (or all ranks)
//
// For loop_red_B only t is set; for loop_red_D only tp is set.
struct Fact {
  FactKind kind = FactKind::kDuplicate;
  ClassId t = -1;
  ClassId tp = -1;
  int64_t dim = 0;
  ReplicaGroup group;
  Combiner op = Combiner::kAdd;
  LayoutTerm layout;
  int64_t rank = kAllRanks;
  ClassId base = -1;
  int64_t offset = 0;
  int64_t length = 0;
  std::vector<SliceRef> ts;  // sorted, duplicate-free

  static Fact Sharded(ClassId t, ClassId tp, int64_t dim, ReplicaGroup group);
  static Fact Duplicate(ClassId t, ClassId tp, ReplicaGroup group);
  static Fact Layout(ClassId t, ClassId tp, LayoutTerm layout,
                     ReplicaGroup group);
  static Fact Partial(ClassId t, ClassId tp, ReplicaGroup group, Combiner op,
                      LayoutTerm layout = LayoutTerm());
  static Fact Slice(ClassId t, ClassId tp, int64_t rank, ClassId base,
                    int64_t dim, int64_t offset, int64_t length);
  static Fact LoopRedB(Combiner op, int64_t dim, ClassId t,
                       std::vector<SliceRef> ts, ClassId base);
  static Fact LoopRedD(Combiner op, int64_t dim, ClassId tp,
                       std::vector<SliceRef> ts, ClassId base, int64_t rank);

  // Classes the fact mentions, in field order.
  std::vector<ClassId> Classes() const;

  // Applies `f` to every class field.
  void MapClasses(const std::function<ClassId(ClassId)>& f);

  friend bool operator==(const Fact&, const Fact&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const Fact& f) {
    h = H::combine(std::move(h), f.kind, f.t, f.tp, f.dim, f.group.ranks, f.op,
                   f.layout, f.rank, f.base, f.offset, f.length);
    for (const SliceRef& s : f.ts) {
      h = H::combine(std::move(h), s.cls, s.offset, s.length);
    }
    return h;
  }
};

// Total order used for canonical commits and dumps.
bool FactLess(const Fact& a, const Fact& b);

// Renders a class for printing.
using ClassNamer = std::function<std::string(ClassId)>;

// "sharded(C, C', dim=1, group=[0,1])" and similar.
std::string FactToString(const Fact& f, const ClassNamer& name);

// Checks the shape invariants of `f`. `shape` maps classes to shapes.
absl::Status CheckFactShapes(const Fact& f,
                             const std::function<Shape(ClassId)>& shape);

// True iff the slices tile [0, extent) without gaps or overlaps.
bool SlicesCover(const std::vector<SliceRef>& ts, int64_t extent);

// True iff no interval of `a` overlaps an interval of `b`.
bool SlicesDisjoint(const std::vector<SliceRef>& a,
                    const std::vector<SliceRef>& b);

// Sorted union; assumes disjointness was checked.
std::vector<SliceRef> SliceUnion(const std::vector<SliceRef>& a,
                                 const std::vector<SliceRef>& b);

}  // namespace graphcheck

#endif  // GRAPHCHECK_RELATION_H_
