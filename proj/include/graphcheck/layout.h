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

#ifndef GRAPHCHECK_LAYOUT_H_
#define GRAPHCHECK_LAYOUT_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "graphcheck/ir.h"

namespace graphcheck {

// One reshape or transpose step. Transposes use the gather convention:
// output dim i is input dim perm[i].
struct LayoutPrim {
  enum class Kind { kTranspose, kReshape };
  Kind kind = Kind::kTranspose;
  std::vector<int64_t> perm;
  Shape target;

  static LayoutPrim Transpose(std::vector<int64_t> perm);
  static LayoutPrim Reshape(Shape target);

  std::string ToString() const;  // "transpose(1,0,2)", "reshape(256,4096)"

  friend bool operator==(const LayoutPrim&, const LayoutPrim&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const LayoutPrim& p) {
    return H::combine(std::move(h), p.kind, p.perm, p.target);
  }
};

// A layout transformation: primitives applied left to right. The empty
// sequence is the identity. Composition is diagrammatic, so Compose(a, b)
// applies a first; layout(t, t', l) means t = l(t').
class LayoutTerm {
 public:
  LayoutTerm() = default;
  explicit LayoutTerm(std::vector<LayoutPrim> prims)
      : prims_(std::move(prims)) {}

  static LayoutTerm Identity() { return LayoutTerm(); }
  static LayoutTerm Transpose(std::vector<int64_t> perm);
  static LayoutTerm Reshape(Shape target);
  // reshape(s1), then transpose(perm), then reshape(s2).
  static LayoutTerm Bijection(Shape s1, std::vector<int64_t> perm, Shape s2);

  const std::vector<LayoutPrim>& prims() const { return prims_; }
  bool empty() const { return prims_.empty(); }

  // "[reshape(64,4,4096), transpose(1,0,2), reshape(256,4096)]"; "[]" for the
  // identity.
  std::string ToString() const;

  friend bool operator==(const LayoutTerm&, const LayoutTerm&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const LayoutTerm& l) {
    return H::combine(std::move(h), l.prims_);
  }

 private:
  std::vector<LayoutPrim> prims_;
};

// Concatenation followed by syntactic canonicalization: adjacent transposes
// fuse, adjacent reshapes keep the outer target, identity transposes drop.
LayoutTerm Compose(const LayoutTerm& first, const LayoutTerm& second);

// Compose with an index-space check: `second` must accept the output of
// `first` applied to `in`.
absl::StatusOr<LayoutTerm> ComposeChecked(const LayoutTerm& first,
                                          const LayoutTerm& second,
                                          const Shape& in);

// Result shape of applying `l` to a tensor of shape `in`.
absl::StatusOr<Shape> OutputShape(const LayoutTerm& l, const Shape& in);

// The element bijection as a gather table: output flat index k reads input
// flat index result[k].
absl::StatusOr<std::vector<int64_t>> ApplyToIndices(const LayoutTerm& l,
                                                    const Shape& in);

// Inverse of `l` on input shape `in`; its input shape is OutputShape(l, in).
absl::StatusOr<LayoutTerm> Invert(const LayoutTerm& l, const Shape& in);

// Inverse of a gather table.
std::vector<int64_t> InvertPermutation(absl::Span<const int64_t> p);

// Semantic normal form on input shape `in`: at most
// [reshape(s1), transpose(p), reshape(s2)] over the coarsest axis atoms, with
// identity pieces omitted. Two grouping layouts with the same element map have
// the same normal form. Fails when a reshape is not a pure merge/split of the
// current atoms.
absl::StatusOr<LayoutTerm> NormalizeLayout(const LayoutTerm& l,
                                           const Shape& in);

// NormalizeLayout, falling back to the syntactic form outside grouping scope.
LayoutTerm CanonicalLayout(const LayoutTerm& l, const Shape& in);

// True iff `l` maps every index of `in` to itself and keeps the shape.
bool IsIdentityOn(const LayoutTerm& l, const Shape& in);

// True iff the reshape from `from` to `to` only merges or splits adjacent dims:
// the union of both shapes' prefix products forms a divisibility chain.
bool IsGroupingReshape(const Shape& from, const Shape& to);

}  // namespace graphcheck

#endif  // GRAPHCHECK_LAYOUT_H_
