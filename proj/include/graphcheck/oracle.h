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

#ifndef GRAPHCHECK_ORACLE_H_
#define GRAPHCHECK_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "graphcheck/ir.h"

namespace graphcheck {

struct OracleResult {
  bool equal = false;
  // First difference, "output 0 rank 1 index 5: baseline 3 vs distributed 4".
  std::string witness;
  // Baseline output values, row-major, as exact rationals ("19", "-1/2").
  std::vector<std::vector<std::string>> baseline_outputs;
};

// Fixed baseline input values by id, row-major.
using InputValues = absl::flat_hash_map<std::string, std::vector<int64_t>>;

// Runs both graphs on the same integer inputs (random unless fixed) in exact
// rational arithmetic. Distributed inputs are derived from baseline inputs
// through the annotations; every rank is simulated and collectives exchange
// values explicitly. Outputs are equal iff every rank holds exactly the
// baseline value with the same dtype tag. UnimplementedError for ops without
// exact semantics (such as exp).
absl::StatusOr<OracleResult> OracleExecute(const Graph& base, const Graph& dist,
                                           const AnnotationSet& ann,
                                           uint64_t seed,
                                           const InputValues& fixed = {});

}  // namespace graphcheck

#endif  // GRAPHCHECK_ORACLE_H_
