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

#ifndef GRAPHCHECK_ENGINE_H_
#define GRAPHCHECK_ENGINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "graphcheck/egraph.h"
#include "graphcheck/relation.h"

namespace graphcheck {

// Read-only view handed to rule matchers during one iteration.
class RuleEnv {
 public:
  RuleEnv(const EGraph& eg, const FactDB& db, const ReplicaGroup& world)
      : eg_(eg), db_(db), world_(world) {}

  const EGraph& eg() const { return eg_; }
  const FactDB& db() const { return db_; }
  const ReplicaGroup& world() const { return world_; }

  // Group over which tp replicates t: the world when both live in one class,
  // else the group of a stored duplicate fact.
  std::optional<ReplicaGroup> DupGroup(ClassId t, ClassId tp) const;

  // Facts of `kind` with t == x (canonical).
  std::vector<const Fact*> FactsOnT(FactKind kind, ClassId x) const {
    return db_.WithT(kind, eg_.Find(x));
  }
  std::vector<const Fact*> FactsOnTp(FactKind kind, ClassId xp) const {
    return db_.WithTp(kind, eg_.Find(xp));
  }

  // Baseline / distributed users of class c with the given opcode.
  std::vector<ENodeId> UsersOn(ClassId c, GraphKind side, OpCode code) const;

 private:
  const EGraph& eg_;
  const FactDB& db_;
  const ReplicaGroup& world_;
};

using NodeMatcher =
    std::function<void(const RuleEnv&, ENodeId, std::vector<Fact>&)>;
using FactMatcher =
    std::function<void(const RuleEnv&, const Fact&, std::vector<Fact>&)>;

enum class RuleFamily { kPartition, kLayout, kSlicing, kUnroll, kMixed };

absl::string_view RuleFamilyName(RuleFamily family);

// A rule is a record: its premises and head are rendered as text for
// explain-rules, and a compiled matcher evaluates the premises. Node-anchored
// matchers see each candidate e-node; fact-anchored matchers see each fact
// committed in the previous iteration.
struct Rule {
  std::string id;
  RuleFamily family = RuleFamily::kPartition;
  std::string head;
  std::string body;
  std::string note;
  NodeMatcher on_node;
  FactMatcher on_fact;
};

struct SaturationBudget {
  int64_t max_iterations = 1000;
  int64_t max_facts = 1000000;
};

struct SaturationResult {
  bool saturated = false;
  int64_t iterations = 0;
  int64_t fact_count = 0;
  int64_t merges = 0;
  int64_t rejected = 0;  // derivations dropped by the shape check
  std::string budget_note;
};

struct EngineOptions {
  SaturationBudget budget;
  int jobs = 1;  // matcher threads; 1 is the sequential reference schedule
};

// Runs rules to a fixpoint over an e-graph and its fact database. Stages are
// sets of e-nodes activated cumulatively; each stage runs to its own
// fixpoint before the next one is activated.
class Engine {
 public:
  Engine(EGraph& eg, FactDB& db, ReplicaGroup world,
         const std::vector<const Rule*>& rules, EngineOptions opts)
      : eg_(eg),
        db_(db),
        world_(std::move(world)),
        rules_(rules),
        opts_(opts) {}

  // Inserts a fact before saturation (input registration). Applies the
  // duplicate-merge policy.
  void Seed(Fact fact, absl::string_view why);

  SaturationResult Run(const std::vector<std::vector<ENodeId>>& stages);

 private:
  // Commits derivations in canonical order. Returns the number of new facts.
  int64_t Commit(std::vector<std::pair<Fact, const Rule*>> derived,
                 int64_t iteration, SaturationResult& result);
  void Settle(std::vector<int64_t>& touched_facts);

  EGraph& eg_;
  FactDB& db_;
  ReplicaGroup world_;
  std::vector<const Rule*> rules_;
  EngineOptions opts_;
  std::vector<int64_t> delta_;  // fact positions new since last match
};

}  // namespace graphcheck

#endif  // GRAPHCHECK_ENGINE_H_
