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

#ifndef GRAPHCHECK_BIJECTION_H_
#define GRAPHCHECK_BIJECTION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphcheck/axis.h"
#include "graphcheck/ir.h"
#include "graphcheck/layout.h"

namespace graphcheck {

struct NormalizedRank {
  SymLayoutExpr base;
  SymLayoutExpr dist;
  bool impossible = false;
};

// Brings both expressions to equal rank with pairwise matchable axes. Merged
// groups are split down to shared atoms (splitting is preferred); runs of atoms
// that stay adjacent, in order, inside one dim on both sides are kept merged.
// Extent-1 atoms are dropped. impossible is set when the atom sets differ.
NormalizedRank NormalizeRank(const AxisSpace& space, const SymLayoutExpr& base,
                             const SymLayoutExpr& dist);

struct PermutationResult {
  std::optional<std::vector<int64_t>> perm;  // nullopt is ⊥
  // Set when some baseline axis matched more than one distributed axis.
  bool ambiguous = false;
};

// p[i] = the smallest unused j whose distributed axis equals baseline axis i
// under the shared atoms; ⊥ when none exists.
PermutationResult FindPermutation(const AxisSpace& space,
                                  const SymLayoutExpr& base,
                                  const SymLayoutExpr& dist);

struct BijectionResult {
  // Maps the distributed path's terminal tensor to the baseline path's
  // terminal tensor; at most [reshape, transpose, reshape]. Meaningless when
  // bottom is set.
  LayoutTerm ops;
  bool bottom = false;
  std::vector<int64_t> perm;
  std::string reason;      // why ⊥ was returned
  std::string axis_map;    // M, for reports
  std::string base_expr;   // Ê_b
  std::string dist_expr;   // Ê_d
  bool ambiguous = false;  // logged as a warning by callers
};

// Given layout(b, d, l) (b = l(d)), the baseline layout path s_b applied to b
// and the distributed path s_d applied to d, infers the bijection with
// terminal_b = ops(terminal_d). Every non-⊥ result has been checked by index
// enumeration at surrogate extents: each atom is mapped to a distinct small
// prime, so a wrong permutation cannot pass by coincidence.
BijectionResult InferBijection(const LayoutTerm& l, const LayoutTerm& s_b,
                               const LayoutTerm& s_d, const Shape& shape_b,
                               const Shape& shape_d);

}  // namespace graphcheck

#endif  // GRAPHCHECK_BIJECTION_H_
