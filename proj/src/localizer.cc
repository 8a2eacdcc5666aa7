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

#include "graphcheck/localizer.h"

#include <algorithm>
#include <deque>

#include "absl/strings/str_cat.h"
#include "graphcheck/relation.h"
#include "json.hpp"

namespace graphcheck {
namespace {

const std::vector<std::string>& MembersOf(const LocalizerScope& scope,
                                          GraphKind side) {
  return side == GraphKind::kBaseline ? scope.base_members : scope.dist_members;
}

GraphKind Other(GraphKind side) {
  return side == GraphKind::kBaseline ? GraphKind::kDistributed
                                      : GraphKind::kBaseline;
}

bool InputVerified(const NodeStatus& status, const Graph& g,
                   absl::string_view id) {
  const TensorNode* n = g.Find(id);
  if (n != nullptr && n->op.code == OpCode::kInput) return true;
  return status.Verified(g.kind(), id);
}

}  // namespace

absl::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kVerified:
      return "verified";
    case Verdict::kUnverified:
      return "unverified";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

NodeStatus Classify(const EGraph& eg, const FactDB& db, const Graph& base,
                    const Graph& dist, const LocalizerScope& scope) {
  NodeStatus status;
  for (const std::string& id : scope.base_verified_inputs) {
    status.base_verified.insert(id);
  }
  for (const std::string& id : scope.dist_verified_inputs) {
    status.dist_verified.insert(id);
  }
  for (const Graph* g : {&base, &dist}) {
    const GraphKind side = g->kind();
    auto& verified = side == GraphKind::kBaseline ? status.base_verified
                                                  : status.dist_verified;
    for (const std::string& id : MembersOf(scope, side)) {
      const TensorNode* n = g->Find(id);
      if (n != nullptr && n->op.code == OpCode::kInput) {
        verified.insert(id);
        continue;
      }
      std::optional<ClassId> c = eg.ClassOfOrigin(side, id);
      if (!c.has_value()) continue;
      if (eg.HasSide(*c, Other(side)) || !db.About(*c).empty()) {
        verified.insert(id);
      }
    }
  }
  return status;
}

std::vector<std::string> Frontier(const NodeStatus& status, const Graph& g,
                                  const std::vector<std::string>& members) {
  absl::flat_hash_set<std::string> member_set(members.begin(), members.end());
  std::vector<std::string> out;
  absl::StatusOr<std::vector<int64_t>> order = TopologicalOrder(g);
  if (!order.ok()) return out;
  for (int64_t i : *order) {
    const TensorNode& n = g.nodes()[i];
    if (!member_set.contains(n.id) || status.Verified(g.kind(), n.id)) {
      continue;
    }
    if (n.op.code == OpCode::kInput) continue;
    bool inputs_ok = true;
    for (const std::string& in : n.inputs) {
      inputs_ok = inputs_ok && InputVerified(status, g, in);
    }
    if (inputs_ok) out.push_back(n.id);
  }
  return out;
}

void AppendFrontier(const EGraph& eg, const FactDB& db, const Graph& base,
                    const Graph& dist, const LocalizerScope& scope,
                    const NodeStatus& status, DiscrepancyReport& report) {
  ClassNamer namer = [&](ClassId c) { return eg.ClassName(c); };
  for (const Graph* g : {&base, &dist}) {
    const GraphKind side = g->kind();
    const std::vector<std::string>& members = MembersOf(scope, side);
    absl::flat_hash_set<std::string> member_set(members.begin(), members.end());
    std::vector<std::string> front = Frontier(status, *g, members);
    for (const std::string& id : front) {
      const TensorNode& n = g->Get(id);
      FrontierNode fn;
      fn.side = side;
      fn.id = id;
      fn.op = n.op.ToString();
      fn.loc = n.loc;
      for (const std::string& in : n.inputs) {
        std::optional<ClassId> c = eg.ClassOfOrigin(side, in);
        if (!c.has_value()) continue;
        for (int64_t pos : db.About(*c)) {
          std::string text = FactToString(db.facts()[pos].fact, namer);
          if (std::find(fn.input_facts.begin(), fn.input_facts.end(), text) ==
              fn.input_facts.end()) {
            fn.input_facts.push_back(std::move(text));
          }
        }
        if (eg.HasSide(*c, Other(side))) {
          std::string text = absl::StrCat("same-class(", eg.ClassName(*c), ")");
          if (std::find(fn.input_facts.begin(), fn.input_facts.end(), text) ==
              fn.input_facts.end()) {
            fn.input_facts.push_back(std::move(text));
          }
        }
      }
      report.frontier.push_back(std::move(fn));
    }
    // Depth-limited unverified consumers, breadth first.
    const std::vector<std::vector<int64_t>> consumers = g->Consumers();
    absl::flat_hash_set<std::string> seen(front.begin(), front.end());
    std::deque<std::pair<int64_t, int>> queue;
    for (const std::string& id : front) queue.emplace_back(g->IndexOf(id), 0);
    const std::string prefix =
        side == GraphKind::kBaseline ? "baseline:" : "distributed:";
    while (!queue.empty()) {
      auto [i, depth] = queue.front();
      queue.pop_front();
      if (depth == 3) continue;
      for (int64_t c : consumers[i]) {
        const std::string& cid = g->nodes()[c].id;
        if (!member_set.contains(cid) || status.Verified(side, cid) ||
            !seen.insert(cid).second) {
          continue;
        }
        report.consumers.push_back(absl::StrCat(prefix, cid));
        queue.emplace_back(c, depth + 1);
      }
    }
  }
}

std::string RenderReport(const DiscrepancyReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json j;
    j["verdict"] = std::string(VerdictName(report.verdict));
    j["frontier"] = nlohmann::ordered_json::array();
    for (const FrontierNode& f : report.frontier) {
      nlohmann::ordered_json e;
      e["side"] = std::string(GraphKindName(f.side));
      e["id"] = f.id;
      e["op"] = f.op;
      e["file"] = f.loc.has_value() ? f.loc->file : "";
      e["line"] = f.loc.has_value() ? f.loc->line : 0;
      e["expr"] = f.loc.has_value() ? f.loc->expr : "";
      e["input_facts"] = f.input_facts;
      j["frontier"].push_back(std::move(e));
    }
    j["consumers"] = report.consumers;
    j["summary"] = report.summary;
    j["stats"] = {{"iterations", report.stats.iterations},
                  {"facts", report.stats.facts},
                  {"layers", report.stats.layers},
                  {"memo_hits", report.stats.memo_hits}};
    return j.dump(2) + "\n";
  }
  std::string out;
  if (report.verdict == Verdict::kVerified) {
    absl::StrAppend(&out, "verified\n");
  } else {
    absl::StrAppend(&out, VerdictName(report.verdict), ": ", report.summary,
                    "\n");
    for (const FrontierNode& f : report.frontier) {
      absl::StrAppend(&out, "  frontier ", GraphKindName(f.side), " ", f.id,
                      " = ", f.op);
      if (f.loc.has_value()) {
        absl::StrAppend(&out, " at ", f.loc->ToString());
        if (!f.loc->expr.empty()) absl::StrAppend(&out, " (", f.loc->expr, ")");
      }
      absl::StrAppend(&out, "\n");
      for (const std::string& fact : f.input_facts) {
        absl::StrAppend(&out, "    input fact ", fact, "\n");
      }
    }
    for (const std::string& c : report.consumers) {
      absl::StrAppend(&out, "  consumer ", c, "\n");
    }
  }
  absl::StrAppend(&out, "stats: iterations=", report.stats.iterations,
                  " facts=", report.stats.facts,
                  " layers=", report.stats.layers,
                  " memo_hits=", report.stats.memo_hits, "\n");
  return out;
}

}  // namespace graphcheck
