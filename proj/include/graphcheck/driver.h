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

#ifndef GRAPHCHECK_DRIVER_H_
#define GRAPHCHECK_DRIVER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "graphcheck/engine.h"
#include "graphcheck/ir.h"
#include "graphcheck/localizer.h"
#include "graphcheck/rules.h"

namespace graphcheck {

// One layer of both graphs. Members exclude input nodes. `in` lists the
// tensors a layer reads but does not define (graph inputs and earlier-layer
// results); `out` lists members read by later layers or returned.
struct LayerPair {
  int64_t layer = 0;
  std::vector<std::string> base_members;
  std::vector<std::string> dist_members;
  std::vector<std::string> base_in;
  std::vector<std::string> dist_in;
  std::vector<std::string> base_out;
  std::vector<std::string> dist_out;
};

// One pair per layer tag, ascending. Tags must be present on every non-input
// node and contiguous from 0 on both sides. With `monolithic` the whole
// graph is one pair.
absl::StatusOr<std::vector<LayerPair>> PartitionLayers(const Graph& base,
                                                       const Graph& dist,
                                                       bool monolithic = false);

struct VerifyOptions {
  bool memo = true;
  bool partition = true;
  bool keep_going = false;
  bool dump_facts = false;
  EngineOptions engine;
};

struct LayerOutcome {
  int64_t layer = 0;
  bool ok = false;
  bool memo_hit = false;
  uint64_t fingerprint = 0;
  SaturationResult saturation;
  std::vector<std::string> failed_outputs;
};

struct VerificationOutcome {
  Verdict verdict = Verdict::kVerified;
  std::vector<LayerOutcome> layers;
  int64_t rewrites = 0;  // layers saturated rather than taken from the memo
  int64_t memo_hits = 0;
  int64_t iterations = 0;
  int64_t facts = 0;
  DiscrepancyReport report;
  std::string fact_dump;  // filled when VerifyOptions::dump_facts is set
  double seconds = 0;
};

// Checks that `dist` implements `base` given the annotated input relations.
// Graphs and annotations must already be valid.
VerificationOutcome VerifyPair(const Graph& base, const Graph& dist,
                               const AnnotationSet& ann,
                               const RuleCatalog& catalog,
                               const VerifyOptions& opts);

}  // namespace graphcheck

#endif  // GRAPHCHECK_DRIVER_H_
