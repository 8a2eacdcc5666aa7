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

#include "graphcheck/relation.h"

#include <algorithm>
#include <tuple>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace graphcheck {

absl::string_view FactKindName(FactKind kind) {
  switch (kind) {
    case FactKind::kSharded:
      return "sharded";
    case FactKind::kDuplicate:
      return "duplicate";
    case FactKind::kLayout:
      return "layout";
    case FactKind::kPartial:
      return "partial";
    case FactKind::kSlice:
      return "slice";
    case FactKind::kLoopRedB:
      return "loop_red_B";
    case FactKind::kLoopRedD:
      return "loop_red_D";
  }
  return "?";
}

Fact Fact::Sharded(ClassId t, ClassId tp, int64_t dim, ReplicaGroup group) {
  Fact f;
  f.kind = FactKind::kSharded;
  f.t = t;
  f.tp = tp;
  f.dim = dim;
  f.group = std::move(group);
  return f;
}

Fact Fact::Duplicate(ClassId t, ClassId tp, ReplicaGroup group) {
  Fact f;
  f.kind = FactKind::kDuplicate;
  f.t = t;
  f.tp = tp;
  f.group = std::move(group);
  return f;
}

Fact Fact::Layout(ClassId t, ClassId tp, LayoutTerm layout,
                  ReplicaGroup group) {
  Fact f;
  f.kind = FactKind::kLayout;
  f.t = t;
  f.tp = tp;
  f.layout = std::move(layout);
  f.group = std::move(group);
  return f;
}

Fact Fact::Partial(ClassId t, ClassId tp, ReplicaGroup group, Combiner op,
                   LayoutTerm layout) {
  Fact f;
  f.kind = FactKind::kPartial;
  f.t = t;
  f.tp = tp;
  f.group = std::move(group);
  f.op = op;
  f.layout = std::move(layout);
  return f;
}

Fact Fact::Slice(ClassId t, ClassId tp, int64_t rank, ClassId base, int64_t dim,
                 int64_t offset, int64_t length) {
  Fact f;
  f.kind = FactKind::kSlice;
  f.t = t;
  f.tp = tp;
  f.rank = rank;
  f.base = base;
  f.dim = dim;
  f.offset = offset;
  f.length = length;
  return f;
}

Fact Fact::LoopRedB(Combiner op, int64_t dim, ClassId t,
                    std::vector<SliceRef> ts, ClassId base) {
  Fact f;
  f.kind = FactKind::kLoopRedB;
  f.op = op;
  f.dim = dim;
  f.t = t;
  f.ts = std::move(ts);
  f.base = base;
  return f;
}

Fact Fact::LoopRedD(Combiner op, int64_t dim, ClassId tp,
                    std::vector<SliceRef> ts, ClassId base, int64_t rank) {
  Fact f;
  f.kind = FactKind::kLoopRedD;
  f.op = op;
  f.dim = dim;
  f.tp = tp;
  f.ts = std::move(ts);
  f.base = base;
  f.rank = rank;
  return f;
}

std::vector<ClassId> Fact::Classes() const {
  std::vector<ClassId> out;
  if (t >= 0) out.push_back(t);
  if (tp >= 0) out.push_back(tp);
  if (base >= 0) out.push_back(base);
  for (const SliceRef& s : ts) out.push_back(s.cls);
  return out;
}

void Fact::MapClasses(const std::function<ClassId(ClassId)>& f) {
  if (t >= 0) t = f(t);
  if (tp >= 0) tp = f(tp);
  if (base >= 0) base = f(base);
  for (SliceRef& s : ts) s.cls = f(s.cls);
  std::sort(ts.begin(), ts.end());
}

bool FactLess(const Fact& a, const Fact& b) {
  auto key = [](const Fact& f) {
    return std::tie(f.kind, f.t, f.tp, f.dim, f.group.ranks, f.op, f.rank,
                    f.base, f.offset, f.length, f.ts);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  return a.layout.ToString() < b.layout.ToString();
}

namespace {

std::string TsToString(const std::vector<SliceRef>& ts,
                       const ClassNamer& name) {
  std::vector<std::string> parts;
  for (const SliceRef& s : ts) {
    parts.push_back(absl::StrCat(name(s.cls), "@", s.offset, "+", s.length));
  }
  return absl::StrCat("{", absl::StrJoin(parts, ","), "}");
}

std::string RankToString(int64_t rank) {
  return rank == kAllRanks ? "ALL" : absl::StrCat(rank);
}

}  // namespace

std::string FactToString(const Fact& f, const ClassNamer& name) {
  const std::string kind(FactKindName(f.kind));
  switch (f.kind) {
    case FactKind::kSharded:
      return absl::StrCat(kind, "(", name(f.t), ", ", name(f.tp),
                          ", dim=", f.dim, ", group=", f.group.ToString(), ")");
    case FactKind::kDuplicate:
      return absl::StrCat(kind, "(", name(f.t), ", ", name(f.tp),
                          ", group=", f.group.ToString(), ")");
    case FactKind::kLayout:
      return absl::StrCat(kind, "(", name(f.t), ", ", name(f.tp), ", ",
                          f.layout.ToString(), ", group=", f.group.ToString(),
                          ")");
    case FactKind::kPartial: {
      std::string s = absl::StrCat(kind, "(", name(f.t), ", ", name(f.tp),
                                   ", group=", f.group.ToString(),
                                   ", op=", CombinerName(f.op));
      if (!f.layout.empty()) absl::StrAppend(&s, ", ", f.layout.ToString());
      return absl::StrCat(s, ")");
    }
    case FactKind::kSlice:
      return absl::StrCat(kind, "(", name(f.t), ", ", name(f.tp),
                          ", rank=", f.rank, ", base=", name(f.base),
                          ", dim=", f.dim, ", offset=", f.offset,
                          ", length=", f.length, ")");
    case FactKind::kLoopRedB:
      return absl::StrCat(kind, "(", CombinerName(f.op), ", dim=", f.dim, ", ",
                          name(f.t), ", ", TsToString(f.ts, name), ", ",
                          name(f.base), ")");
    case FactKind::kLoopRedD:
      return absl::StrCat(kind, "(", CombinerName(f.op), ", dim=", f.dim, ", ",
                          name(f.tp), ", ", TsToString(f.ts, name), ", ",
                          name(f.base), ", rank=", RankToString(f.rank), ")");
  }
  return kind;
}

absl::Status CheckFactShapes(const Fact& f,
                             const std::function<Shape(ClassId)>& shape) {
  auto fail = [&](absl::string_view why) {
    return absl::FailedPreconditionError(
        absl::StrCat(FactKindName(f.kind), ": ", why));
  };
  switch (f.kind) {
    case FactKind::kSharded: {
      Shape a = shape(f.t), b = shape(f.tp);
      if (a.rank() != b.rank() || f.dim < 0 || f.dim >= a.rank()) {
        return fail("rank or dim mismatch");
      }
      for (int64_t i = 0; i < a.rank(); ++i) {
        int64_t want = i == f.dim ? b[i] * f.group.size() : b[i];
        if (a[i] != want) return fail("extents do not match the group size");
      }
      return absl::OkStatus();
    }
    case FactKind::kDuplicate:
      if (shape(f.t) != shape(f.tp)) return fail("shapes differ");
      return absl::OkStatus();
    case FactKind::kLayout:
    case FactKind::kPartial: {
      absl::StatusOr<Shape> out = OutputShape(f.layout, shape(f.tp));
      if (!out.ok() || *out != shape(f.t)) {
        return fail("layout does not map tp onto t");
      }
      return absl::OkStatus();
    }
    case FactKind::kSlice: {
      Shape b = shape(f.base);
      if (f.dim < 0 || f.dim >= b.rank() || f.offset < 0 ||
          f.offset + f.length > b[f.dim]) {
        return fail("slice out of range");
      }
      return absl::OkStatus();
    }
    case FactKind::kLoopRedB:
    case FactKind::kLoopRedD: {
      Shape b = shape(f.base);
      if (f.dim < 0 || f.dim >= b.rank()) return fail("dim out of range");
      for (size_t i = 0; i < f.ts.size(); ++i) {
        const SliceRef& s = f.ts[i];
        if (s.offset < 0 || s.offset + s.length > b[f.dim]) {
          return fail("slice out of range");
        }
        if (i > 0 && f.ts[i - 1].offset + f.ts[i - 1].length > s.offset) {
          return fail("slices overlap");
        }
      }
      return absl::OkStatus();
    }
  }
  return absl::OkStatus();
}

namespace {

std::vector<std::pair<int64_t, int64_t>> Intervals(
    const std::vector<SliceRef>& ts) {
  std::vector<std::pair<int64_t, int64_t>> iv;
  for (const SliceRef& s : ts) iv.push_back({s.offset, s.offset + s.length});
  std::sort(iv.begin(), iv.end());
  return iv;
}

}  // namespace

bool SlicesCover(const std::vector<SliceRef>& ts, int64_t extent) {
  int64_t next = 0;
  for (const auto& [lo, hi] : Intervals(ts)) {
    if (lo != next) return false;
    next = hi;
  }
  return next == extent;
}

bool SlicesDisjoint(const std::vector<SliceRef>& a,
                    const std::vector<SliceRef>& b) {
  for (const SliceRef& x : a) {
    for (const SliceRef& y : b) {
      if (x.offset < y.offset + y.length && y.offset < x.offset + x.length) {
        return false;
      }
    }
  }
  return true;
}

std::vector<SliceRef> SliceUnion(const std::vector<SliceRef>& a,
                                 const std::vector<SliceRef>& b) {
  std::vector<SliceRef> out = a;
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace graphcheck
