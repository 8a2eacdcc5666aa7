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

#ifndef GRAPHCHECK_LOCALIZER_H_
#define GRAPHCHECK_LOCALIZER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "graphcheck/egraph.h"
#include "graphcheck/ir.h"

namespace graphcheck {

enum class Verdict { kVerified, kUnverified, kInconclusive };

absl::string_view VerdictName(Verdict v);

// Node ids of one side that take part in a relation.
struct NodeStatus {
  absl::flat_hash_set<std::string> base_verified;
  absl::flat_hash_set<std::string> dist_verified;

  bool Verified(GraphKind side, absl::string_view id) const {
    return (side == GraphKind::kBaseline ? base_verified : dist_verified)
        .contains(id);
  }
};

// The subgraph being classified: member node ids per side, and the ids
// already known verified on entry (layer inputs with relations).
struct LocalizerScope {
  std::vector<std::string> base_members;
  std::vector<std::string> dist_members;
  std::vector<std::string> base_verified_inputs;
  std::vector<std::string> dist_verified_inputs;
};

// A node is verified iff its e-class holds nodes of both sides or appears in
// a fact. Input nodes are always verified.
NodeStatus Classify(const EGraph& eg, const FactDB& db, const Graph& base,
                    const Graph& dist, const LocalizerScope& scope);

// Unverified members whose inputs are all verified, in topological order
// with ties broken by id.
std::vector<std::string> Frontier(const NodeStatus& status, const Graph& g,
                                  const std::vector<std::string>& members);

struct FrontierNode {
  GraphKind side = GraphKind::kBaseline;
  std::string id;
  std::string op;
  std::optional<SourceLoc> loc;
  std::vector<std::string> input_facts;
};

struct ReportStats {
  int64_t iterations = 0;
  int64_t facts = 0;
  int64_t layers = 0;
  int64_t memo_hits = 0;
};

struct DiscrepancyReport {
  Verdict verdict = Verdict::kVerified;
  std::vector<FrontierNode> frontier;
  // Unverified nodes up to three steps downstream of the frontier.
  std::vector<std::string> consumers;
  std::string summary;
  ReportStats stats;
};

// Frontier entries for both sides of a classified scope, with the facts on
// each entry's inputs, plus depth-limited consumers.
void AppendFrontier(const EGraph& eg, const FactDB& db, const Graph& base,
                    const Graph& dist, const LocalizerScope& scope,
                    const NodeStatus& status, DiscrepancyReport& report);

enum class ReportFormat { kText, kJson };

std::string RenderReport(const DiscrepancyReport& report, ReportFormat format);

}  // namespace graphcheck

#endif  // GRAPHCHECK_LOCALIZER_H_
