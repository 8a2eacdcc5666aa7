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

#include "graphcheck/driver.h"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "graphcheck/egraph.h"

namespace graphcheck {
namespace {

struct SideLayers {
  std::map<int64_t, std::vector<std::string>> members;
};

absl::StatusOr<SideLayers> CollectLayers(const Graph& g) {
  SideLayers out;
  absl::StatusOr<std::vector<int64_t>> order = TopologicalOrder(g);
  if (!order.ok()) return order.status();
  for (int64_t i : *order) {
    const TensorNode& n = g.nodes()[i];
    if (n.op.code == OpCode::kInput) continue;
    if (!n.layer.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("UntaggedNode(", n.id, ")"));
    }
    out.members[*n.layer].push_back(n.id);
  }
  int64_t expect = 0;
  for (const auto& [tag, ids] : out.members) {
    if (tag != expect) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "UntaggedNode: %s graph layer tags are not contiguous (missing %d)",
          GraphKindName(g.kind()), expect));
    }
    ++expect;
  }
  return out;
}

// Ids read by a node of another partition, plus graph outputs.
absl::flat_hash_set<std::string> UsedAcrossLayers(
    const Graph& g, const std::map<int64_t, std::vector<std::string>>& parts) {
  absl::flat_hash_map<std::string, int64_t> part_of;
  for (const auto& [tag, ids] : parts) {
    for (const std::string& id : ids) part_of[id] = tag;
  }
  absl::flat_hash_set<std::string> used(g.outputs().begin(), g.outputs().end());
  for (const TensorNode& n : g.nodes()) {
    auto self = part_of.find(n.id);
    for (const std::string& x : n.inputs) {
      auto other = part_of.find(x);
      if (self == part_of.end() || other == part_of.end() ||
          self->second != other->second) {
        used.insert(x);
      }
    }
  }
  return used;
}

void Boundary(const Graph& g, const std::vector<std::string>& members,
              const absl::flat_hash_set<std::string>& used_outside,
              std::vector<std::string>& in, std::vector<std::string>& out) {
  absl::flat_hash_set<std::string> member_set(members.begin(), members.end());
  absl::flat_hash_set<std::string> seen;
  for (const std::string& id : members) {
    for (const std::string& x : g.Get(id).inputs) {
      if (!member_set.contains(x) && seen.insert(x).second) in.push_back(x);
    }
  }
  for (const std::string& id : members) {
    if (used_outside.contains(id)) out.push_back(id);
  }
}

}  // namespace

absl::StatusOr<std::vector<LayerPair>> PartitionLayers(const Graph& base,
                                                       const Graph& dist,
                                                       bool monolithic) {
  SideLayers b, d;
  if (monolithic) {
    absl::StatusOr<std::vector<int64_t>> ob = TopologicalOrder(base);
    if (!ob.ok()) return ob.status();
    absl::StatusOr<std::vector<int64_t>> od = TopologicalOrder(dist);
    if (!od.ok()) return od.status();
    for (int64_t i : *ob) {
      if (base.nodes()[i].op.code != OpCode::kInput) {
        b.members[0].push_back(base.nodes()[i].id);
      }
    }
    for (int64_t i : *od) {
      if (dist.nodes()[i].op.code != OpCode::kInput) {
        d.members[0].push_back(dist.nodes()[i].id);
      }
    }
  } else {
    absl::StatusOr<SideLayers> sb = CollectLayers(base);
    if (!sb.ok()) return sb.status();
    absl::StatusOr<SideLayers> sd = CollectLayers(dist);
    if (!sd.ok()) return sd.status();
    b = *std::move(sb);
    d = *std::move(sd);
    if (b.members.size() != d.members.size()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "LayerMismatch(%d, %d)", b.members.size(), d.members.size()));
    }
  }
  const absl::flat_hash_set<std::string> b_used =
      UsedAcrossLayers(base, b.members);
  const absl::flat_hash_set<std::string> d_used =
      UsedAcrossLayers(dist, d.members);
  std::vector<LayerPair> pairs;
  for (auto& [tag, ids] : b.members) {
    LayerPair p;
    p.layer = tag;
    p.base_members = ids;
    p.dist_members = d.members[tag];
    Boundary(base, p.base_members, b_used, p.base_in, p.base_out);
    Boundary(dist, p.dist_members, d_used, p.dist_in, p.dist_out);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

namespace {

// A relation between a baseline and a distributed tensor known at a layer
// boundary. t and tp of `fact` are unused.
struct KnownFact {
  std::string base_id;
  std::string dist_id;
  Fact fact;
};

// A seed or summary fact over layer-local indices.
struct LocalFact {
  int64_t base_index;
  int64_t dist_index;
  Fact fact;
};

struct LayerSummary {
  bool ok = false;
  // Every output relates to some distributed output; graph outputs are not
  // yet checked for replication.
  bool boundary_ok = false;
  SaturationResult saturation;
  std::vector<int64_t> failed_outputs;  // positions in base_out
  std::vector<LocalFact> out_facts;     // over (base_out, dist_out) positions
};

uint64_t Fnv1a(absl::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string TemplateString(const Fact& f) {
  Fact g = f;
  g.t = 0;
  g.tp = 0;
  return FactToString(g, [](ClassId) { return std::string("_"); });
}

// Local numbering of one side: in tensors first, then members.
struct LocalSide {
  std::vector<std::string> ids;
  absl::flat_hash_map<std::string, int64_t> index;

  LocalSide(const std::vector<std::string>& in,
            const std::vector<std::string>& members) {
    for (const std::string& id : in) Push(id);
    for (const std::string& id : members) Push(id);
  }
  void Push(const std::string& id) {
    index.emplace(id, static_cast<int64_t>(ids.size()));
    ids.push_back(id);
  }
};

void SerializeSide(const Graph& g, const LocalSide& local, size_t num_in,
                   const std::vector<std::string>& outs, std::string& s) {
  for (size_t i = 0; i < local.ids.size(); ++i) {
    const TensorNode& n = g.Get(local.ids[i]);
    if (i < num_in) {
      absl::StrAppend(&s, "in ", n.shape.ToString(), " ", DTypeName(n.dtype));
    } else {
      absl::StrAppend(&s, n.op.ToString(), " ", n.shape.ToString(), " ",
                      DTypeName(n.dtype), " (");
      for (const std::string& x : n.inputs) {
        absl::StrAppend(&s, local.index.at(x), ",");
      }
      absl::StrAppend(&s, ")");
    }
    if (n.rank.has_value()) absl::StrAppend(&s, " r", *n.rank);
    absl::StrAppend(&s, ";");
  }
  absl::StrAppend(&s, "out");
  for (const std::string& id : outs) {
    absl::StrAppend(&s, " ", local.index.at(id));
  }
  absl::StrAppend(&s, "\n");
}

class Verifier {
 public:
  Verifier(const Graph& base, const Graph& dist, const AnnotationSet& ann,
           const RuleCatalog& catalog, const VerifyOptions& opts)
      : base_(base), dist_(dist), catalog_(catalog), opts_(opts) {
    std::set<int64_t> ranks;
    for (int64_t r : WorldOf(ann).ranks) ranks.insert(r);
    for (const TensorNode& n : dist.nodes()) {
      if (n.rank.has_value()) ranks.insert(*n.rank);
      for (int64_t r : n.op.group.ranks) ranks.insert(r);
    }
    if (ranks.empty()) ranks.insert(0);
    world_.ranks.assign(ranks.begin(), ranks.end());
    for (const AnnotationEntry& e : ann.entries) {
      Fact f = e.kind == RelationKindTag::kShard
                   ? Fact::Sharded(0, 0, e.dim, e.group)
                   : Fact::Duplicate(0, 0, e.group);
      AddKnown(KnownFact{e.baseline_id, e.distributed_ids[0], f});
    }
  }

  VerificationOutcome Run();

 private:
  void AddKnown(KnownFact k) {
    known_by_base_[k.base_id].push_back(known_.size());
    known_.push_back(std::move(k));
  }

  LayerSummary Rewrite(const LayerPair& p, const LocalSide& lb,
                       const LocalSide& ld, const std::vector<LocalFact>& seeds,
                       bool localize, VerificationOutcome& outcome);
  // Positions in base_out of graph outputs that no boundary fact replicates
  // over the world at the matching distributed output.
  std::vector<int64_t> UnreplicatedOutputs(const LayerPair& p,
                                           const LayerSummary& s) const;

  const Graph& base_;
  const Graph& dist_;
  const RuleCatalog& catalog_;
  const VerifyOptions& opts_;
  ReplicaGroup world_;
  std::vector<KnownFact> known_;
  absl::flat_hash_map<std::string, std::vector<size_t>> known_by_base_;
  absl::flat_hash_map<uint64_t, LayerSummary> memo_;
};

ENodeId AddNode(EGraph& eg, const TensorNode& n, GraphKind side, bool leaf,
                const std::vector<ClassId>& children) {
  std::string key;
  OpKind op = n.op;
  if (leaf) {
    op = OpKind::Input();
    key = absl::StrCat(side == GraphKind::kBaseline ? "B." : "D.", n.id);
  } else if (n.op.code == OpCode::kConstant) {
    key = absl::StrCat(n.shape.ToString(), DTypeName(n.dtype));
  }
  if (!leaf && n.rank.has_value()) absl::StrAppend(&key, "@r", *n.rank);
  return eg.Add(op, leaf ? std::vector<ClassId>() : children, key, n.rank,
                n.shape, n.dtype, Origin{side, n.id});
}

LayerSummary Verifier::Rewrite(const LayerPair& p, const LocalSide& lb,
                               const LocalSide& ld,
                               const std::vector<LocalFact>& seeds,
                               bool localize, VerificationOutcome& outcome) {
  EGraph eg;
  FactDB db;
  // Nodes by local index, per side, and their stage depth.
  std::vector<std::vector<ENodeId>> stages;
  absl::flat_hash_set<ENodeId> staged;
  auto add_side = [&](const Graph& g, const LocalSide& local, size_t num_in,
                      std::vector<ClassId>& classes) {
    const GraphKind side = g.kind();
    std::vector<int64_t> depth(local.ids.size(), 0);
    for (size_t i = 0; i < local.ids.size(); ++i) {
      const TensorNode& n = g.Get(local.ids[i]);
      const bool leaf = i < num_in;
      std::vector<ClassId> children;
      int64_t d = 0;
      if (!leaf) {
        for (const std::string& x : n.inputs) {
          int64_t j = local.index.at(x);
          children.push_back(classes[j]);
          d = std::max(d, depth[j] + 1);
        }
      }
      depth[i] = d;
      ENodeId node = AddNode(eg, n, side, leaf, children);
      classes.push_back(eg.ClassOf(node));
      if (leaf) continue;
      if (static_cast<int64_t>(stages.size()) <= d) stages.resize(d + 1);
      if (staged.insert(node).second) stages[d].push_back(node);
    }
  };
  std::vector<ClassId> bc, dc;
  add_side(base_, lb, p.base_in.size(), bc);
  add_side(dist_, ld, p.dist_in.size(), dc);

  Engine engine(eg, db, world_, catalog_.rules(), opts_.engine);
  for (const LocalFact& s : seeds) {
    Fact f = s.fact;
    f.t = bc[s.base_index];
    f.tp = dc[s.dist_index];
    engine.Seed(f, "input");
  }
  LayerSummary summary;
  summary.saturation = engine.Run(stages);

  auto cls = [&](GraphKind side, const std::string& id) {
    return *eg.ClassOfOrigin(side, id);
  };
  // Boundary facts and the output check.
  for (size_t i = 0; i < p.base_out.size(); ++i) {
    const ClassId b = cls(GraphKind::kBaseline, p.base_out[i]);
    bool related = false;
    for (size_t j = 0; j < p.dist_out.size(); ++j) {
      const ClassId d = cls(GraphKind::kDistributed, p.dist_out[j]);
      std::vector<Fact> rel;
      if (eg.Find(b) == eg.Find(d))
        rel.push_back(Fact::Duplicate(0, 0, world_));
      for (FactKind k :
           {FactKind::kDuplicate, FactKind::kLayout, FactKind::kSharded}) {
        for (const Fact* f : db.WithT(k, b)) {
          if (f->tp == eg.Find(d)) rel.push_back(*f);
        }
      }
      for (const Fact& f : rel) {
        summary.out_facts.push_back(
            LocalFact{static_cast<int64_t>(i), static_cast<int64_t>(j), f});
      }
      related = related || !rel.empty();
    }
    if (!related) summary.failed_outputs.push_back(static_cast<int64_t>(i));
  }
  summary.boundary_ok = summary.failed_outputs.empty();
  for (int64_t i : UnreplicatedOutputs(p, summary)) {
    summary.failed_outputs.push_back(i);
  }
  std::sort(summary.failed_outputs.begin(), summary.failed_outputs.end());
  summary.failed_outputs.erase(
      std::unique(summary.failed_outputs.begin(), summary.failed_outputs.end()),
      summary.failed_outputs.end());
  summary.ok = summary.failed_outputs.empty();

  if (opts_.dump_facts) {
    ClassNamer namer = [&](ClassId c) { return eg.ClassName(c); };
    absl::StrAppend(&outcome.fact_dump, "layer ", p.layer, ": ", db.size(),
                    " facts, ", summary.saturation.iterations, " iterations\n");
    std::vector<std::string> lines;
    for (const StoredFact& sf : db.facts()) {
      lines.push_back(absl::StrCat("  ", FactToString(sf.fact, namer), "  # ",
                                   sf.rule, " @", sf.iteration, "\n"));
    }
    std::sort(lines.begin(), lines.end());
    for (const std::string& line : lines) {
      absl::StrAppend(&outcome.fact_dump, line);
    }
  }

  if (!summary.ok && localize) {
    LocalizerScope scope;
    scope.base_members = p.base_members;
    scope.dist_members = p.dist_members;
    for (const LocalFact& s : seeds) {
      scope.base_verified_inputs.push_back(lb.ids[s.base_index]);
      scope.dist_verified_inputs.push_back(ld.ids[s.dist_index]);
    }
    NodeStatus status = Classify(eg, db, base_, dist_, scope);
    AppendFrontier(eg, db, base_, dist_, scope, status, outcome.report);
    std::vector<std::string> failed;
    for (int64_t i : summary.failed_outputs) failed.push_back(p.base_out[i]);
    absl::StrAppend(&outcome.report.summary,
                    outcome.report.summary.empty() ? "" : "; ", "layer ",
                    p.layer, ": no valid relation for output ",
                    absl::StrJoin(failed, ", "));
    if (!summary.saturation.saturated) {
      absl::StrAppend(&outcome.report.summary, " (",
                      summary.saturation.budget_note, ")");
    }
  }
  return summary;
}

std::vector<int64_t> Verifier::UnreplicatedOutputs(
    const LayerPair& p, const LayerSummary& s) const {
  std::vector<int64_t> failed;
  const std::vector<std::string>& bo = base_.outputs();
  const std::vector<std::string>& dout = dist_.outputs();
  for (size_t i = 0; i < p.base_out.size(); ++i) {
    for (size_t k = 0; k < bo.size(); ++k) {
      if (bo[k] != p.base_out[i]) continue;
      bool dup = false;
      for (const LocalFact& f : s.out_facts) {
        dup = dup ||
              (f.base_index == static_cast<int64_t>(i) && k < dout.size() &&
               p.dist_out[f.dist_index] == dout[k] &&
               f.fact.kind == FactKind::kDuplicate && f.fact.group == world_);
      }
      if (!dup) {
        failed.push_back(static_cast<int64_t>(i));
        break;
      }
    }
  }
  return failed;
}

VerificationOutcome Verifier::Run() {
  const auto start = std::chrono::steady_clock::now();
  VerificationOutcome outcome;
  absl::StatusOr<std::vector<LayerPair>> pairs =
      PartitionLayers(base_, dist_, !opts_.partition);
  if (!pairs.ok()) {
    outcome.verdict = Verdict::kUnverified;
    outcome.report.summary = std::string(pairs.status().message());
    return outcome;
  }
  for (const LayerPair& p : *pairs) {
    LocalSide lb(p.base_in, p.base_members);
    LocalSide ld(p.dist_in, p.dist_members);
    // Seeds: known relations among tensors present in this layer.
    std::vector<LocalFact> seeds;
    for (const std::string& id : lb.ids) {
      auto it = known_by_base_.find(id);
      if (it == known_by_base_.end()) continue;
      for (size_t k : it->second) {
        auto d = ld.index.find(known_[k].dist_id);
        if (d == ld.index.end()) continue;
        seeds.push_back(LocalFact{lb.index.at(id), d->second, known_[k].fact});
      }
    }
    std::string ser;
    SerializeSide(base_, lb, p.base_in.size(), p.base_out, ser);
    SerializeSide(dist_, ld, p.dist_in.size(), p.dist_out, ser);
    for (const LocalFact& s : seeds) {
      absl::StrAppend(&ser, s.base_index, "~", s.dist_index, " ",
                      TemplateString(s.fact), ";");
    }
    LayerOutcome lo;
    lo.layer = p.layer;
    lo.fingerprint = Fnv1a(ser);
    LayerSummary summary;
    auto hit = opts_.memo ? memo_.find(lo.fingerprint) : memo_.end();
    if (hit != memo_.end() && hit->second.boundary_ok &&
        UnreplicatedOutputs(p, hit->second).empty()) {
      summary = hit->second;
      summary.ok = true;
      summary.failed_outputs.clear();
      lo.memo_hit = true;
      ++outcome.memo_hits;
    } else {
      summary = Rewrite(p, lb, ld, seeds, /*localize=*/true, outcome);
      ++outcome.rewrites;
      outcome.iterations += summary.saturation.iterations;
      outcome.facts += summary.saturation.fact_count;
      if (opts_.memo && summary.boundary_ok) memo_[lo.fingerprint] = summary;
    }
    lo.ok = summary.ok;
    lo.saturation = summary.saturation;
    for (int64_t i : summary.failed_outputs) {
      lo.failed_outputs.push_back(p.base_out[i]);
    }
    for (const LocalFact& f : summary.out_facts) {
      AddKnown(KnownFact{p.base_out[f.base_index], p.dist_out[f.dist_index],
                         f.fact});
    }
    outcome.layers.push_back(lo);
    if (!summary.ok) {
      const Verdict v = summary.saturation.saturated ? Verdict::kUnverified
                                                     : Verdict::kInconclusive;
      if (outcome.verdict == Verdict::kVerified || v == Verdict::kUnverified) {
        outcome.verdict = v;
      }
      if (!opts_.keep_going) break;
    }
  }
  outcome.report.verdict = outcome.verdict;
  outcome.report.stats.iterations = outcome.iterations;
  outcome.report.stats.facts = outcome.facts;
  outcome.report.stats.layers = static_cast<int64_t>(pairs->size());
  outcome.report.stats.memo_hits = outcome.memo_hits;
  outcome.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return outcome;
}

}  // namespace

VerificationOutcome VerifyPair(const Graph& base, const Graph& dist,
                               const AnnotationSet& ann,
                               const RuleCatalog& catalog,
                               const VerifyOptions& opts) {
  Verifier v(base, dist, ann, catalog, opts);
  return v.Run();
}

}  // namespace graphcheck
