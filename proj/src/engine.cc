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

#include "graphcheck/engine.h"

#include <algorithm>
#include <thread>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"

namespace graphcheck {

absl::string_view RuleFamilyName(RuleFamily family) {
  switch (family) {
    case RuleFamily::kPartition:
      return "Partition";
    case RuleFamily::kLayout:
      return "Layout";
    case RuleFamily::kSlicing:
      return "Slicing";
    case RuleFamily::kUnroll:
      return "Unroll";
    case RuleFamily::kMixed:
      return "Mixed";
  }
  return "?";
}

std::optional<ReplicaGroup> RuleEnv::DupGroup(ClassId t, ClassId tp) const {
  t = eg_.Find(t);
  tp = eg_.Find(tp);
  if (t == tp) return world_;
  for (const Fact* f : db_.WithT(FactKind::kDuplicate, t)) {
    if (f->tp == tp) return f->group;
  }
  return std::nullopt;
}

std::vector<ENodeId> RuleEnv::UsersOn(ClassId c, GraphKind side,
                                      OpCode code) const {
  std::vector<ENodeId> out;
  for (ENodeId u : eg_.Users(c)) {
    const ENode& n = eg_.node(u);
    if (n.op.code == code && n.HasSide(side)) out.push_back(u);
  }
  return out;
}

namespace {

using Derived = std::vector<std::pair<Fact, const Rule*>>;

// Matches node rules over nodes[begin, end) and fact rules over
// facts[fbegin, fend).
void MatchRange(const RuleEnv& env, const std::vector<const Rule*>& rules,
                const std::vector<ENodeId>& nodes, size_t begin, size_t end,
                const std::vector<Fact>& facts, size_t fbegin, size_t fend,
                Derived& out) {
  std::vector<Fact> buf;
  for (const Rule* r : rules) {
    if (r->on_node) {
      for (size_t i = begin; i < end; ++i) {
        buf.clear();
        r->on_node(env, nodes[i], buf);
        for (Fact& f : buf) out.emplace_back(std::move(f), r);
      }
    }
    if (r->on_fact) {
      for (size_t i = fbegin; i < fend; ++i) {
        buf.clear();
        r->on_fact(env, facts[i], buf);
        for (Fact& f : buf) out.emplace_back(std::move(f), r);
      }
    }
  }
}

}  // namespace

void Engine::Seed(Fact fact, absl::string_view why) {
  fact.MapClasses([&](ClassId c) { return eg_.Find(c); });
  if (!db_.Insert(fact, 0, why)) return;
  if (fact.kind == FactKind::kDuplicate && fact.group == world_) {
    eg_.Merge(fact.t, fact.tp);
  }
  std::vector<int64_t> touched;
  Settle(touched);
  delta_.clear();
  for (int64_t i = 0; i < db_.size(); ++i) delta_.push_back(i);
}

void Engine::Settle(std::vector<int64_t>& touched_facts) {
  if (!eg_.NeedsRebuild()) return;
  eg_.Rebuild();
  std::vector<int64_t> changed = db_.Canonicalize(eg_);
  touched_facts.insert(touched_facts.end(), changed.begin(), changed.end());
}

int64_t Engine::Commit(Derived derived, int64_t iteration,
                       SaturationResult& result) {
  absl::flat_hash_map<const Rule*, size_t> order;
  for (size_t i = 0; i < rules_.size(); ++i) order[rules_[i]] = i;
  for (auto& [f, r] : derived) {
    f.MapClasses([&](ClassId c) { return eg_.Find(c); });
  }
  std::sort(derived.begin(), derived.end(), [&](const auto& a, const auto& b) {
    if (FactLess(a.first, b.first)) return true;
    if (FactLess(b.first, a.first)) return false;
    return order[a.second] < order[b.second];
  });
  std::vector<Fact> fresh;
  for (size_t i = 0; i < derived.size(); ++i) {
    const Fact& f = derived[i].first;
    if (i > 0 && f == derived[i - 1].first) continue;
    if (db_.Contains(f)) continue;
    absl::Status shapes =
        CheckFactShapes(f, [&](ClassId c) { return eg_.ShapeOf(c); });
    if (!shapes.ok()) {
      ++result.rejected;
      continue;
    }
    db_.Insert(f, iteration, derived[i].second->id);
    fresh.push_back(f);
    if (f.kind == FactKind::kDuplicate && f.group == world_) {
      eg_.Merge(f.t, f.tp);
    }
  }
  std::vector<int64_t> touched;
  Settle(touched);
  absl::flat_hash_set<int64_t> delta(touched.begin(), touched.end());
  for (Fact& f : fresh) {
    f.MapClasses([&](ClassId c) { return eg_.Find(c); });
    std::optional<int64_t> pos = db_.PositionOf(f);
    if (pos.has_value()) delta.insert(*pos);
  }
  delta_.assign(delta.begin(), delta.end());
  std::sort(delta_.begin(), delta_.end());
  return static_cast<int64_t>(fresh.size());
}

SaturationResult Engine::Run(const std::vector<std::vector<ENodeId>>& stages) {
  SaturationResult result;
  std::vector<bool> active(eg_.num_nodes(), false);
  std::vector<ENodeId> active_list;
  RuleEnv env(eg_, db_, world_);
  const int jobs = std::max(1, opts_.jobs);
  auto over_budget = [&]() {
    if (result.iterations >= opts_.budget.max_iterations) {
      result.budget_note = absl::StrCat("iteration budget of ",
                                        opts_.budget.max_iterations, " hit");
      return true;
    }
    if (db_.size() > opts_.budget.max_facts) {
      result.budget_note =
          absl::StrCat("fact budget of ", opts_.budget.max_facts, " hit");
      return true;
    }
    return false;
  };

  for (const std::vector<ENodeId>& stage : stages) {
    if (stage.empty()) continue;
    for (ENodeId n : stage) {
      if (n >= 0 && n < eg_.num_nodes() && !active[n]) {
        active[n] = true;
        active_list.push_back(n);
      }
    }
    std::sort(active_list.begin(), active_list.end());
    bool first = true;
    absl::flat_hash_set<ClassId> touched;
    while (true) {
      if (over_budget()) {
        result.fact_count = db_.size();
        result.merges = eg_.num_merges();
        return result;
      }
      std::vector<ENodeId> candidates;
      std::vector<Fact> delta_facts;
      if (first) {
        candidates = active_list;
        for (const StoredFact& s : db_.facts()) delta_facts.push_back(s.fact);
      } else {
        // Classes reachable from touched ones through layout ops, so that
        // rules reading whole layout paths see the change.
        std::vector<ClassId> work(touched.begin(), touched.end());
        absl::flat_hash_set<ClassId> reach(touched.begin(), touched.end());
        while (!work.empty()) {
          ClassId c = work.back();
          work.pop_back();
          for (ENodeId u : eg_.Users(c)) {
            if (!eg_.node(u).op.IsLayout()) continue;
            ClassId uc = eg_.ClassOf(u);
            if (reach.insert(uc).second) work.push_back(uc);
          }
        }
        absl::flat_hash_set<ENodeId> cand;
        for (ClassId c : reach) {
          for (ENodeId n : eg_.Members(c)) cand.insert(n);
          for (ENodeId n : eg_.Users(c)) cand.insert(n);
        }
        for (ENodeId n : cand) {
          if (n < static_cast<ENodeId>(active.size()) && active[n]) {
            candidates.push_back(n);
          }
        }
        std::sort(candidates.begin(), candidates.end());
        for (int64_t pos : delta_) delta_facts.push_back(db_.facts()[pos].fact);
      }
      if (candidates.empty() && delta_facts.empty()) break;
      ++result.iterations;

      std::vector<Derived> parts(jobs);
      auto run = [&](int j) {
        size_t n0 = candidates.size() * j / jobs;
        size_t n1 = candidates.size() * (j + 1) / jobs;
        size_t f0 = delta_facts.size() * j / jobs;
        size_t f1 = delta_facts.size() * (j + 1) / jobs;
        MatchRange(env, rules_, candidates, n0, n1, delta_facts, f0, f1,
                   parts[j]);
      };
      if (jobs == 1) {
        run(0);
      } else {
        std::vector<std::thread> threads;
        for (int j = 0; j < jobs; ++j) threads.emplace_back(run, j);
        for (std::thread& t : threads) t.join();
      }
      Derived derived;
      for (Derived& p : parts) {
        for (auto& d : p) derived.push_back(std::move(d));
      }
      const int64_t merges_before = eg_.num_merges();
      int64_t fresh = Commit(std::move(derived), result.iterations, result);
      first = false;
      touched = eg_.TakeMergedClasses();
      for (int64_t pos : delta_) {
        for (ClassId c : db_.facts()[pos].fact.Classes()) {
          touched.insert(eg_.Find(c));
        }
      }
      if (fresh == 0 && eg_.num_merges() == merges_before) break;
    }
  }
  result.saturated = true;
  result.fact_count = db_.size();
  result.merges = eg_.num_merges();
  return result;
}

}  // namespace graphcheck
