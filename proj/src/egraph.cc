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

#include "graphcheck/egraph.h"

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace graphcheck {
namespace {

const std::vector<ENodeId>& Empty() {
  static const std::vector<ENodeId>* const kEmpty = new std::vector<ENodeId>();
  return *kEmpty;
}

void InsertSorted(std::vector<ENodeId>& v, ENodeId n) {
  auto it = std::lower_bound(v.begin(), v.end(), n);
  if (it == v.end() || *it != n) v.insert(it, n);
}

std::vector<ENodeId> MergeSorted(const std::vector<ENodeId>& a,
                                 const std::vector<ENodeId>& b) {
  std::vector<ENodeId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

}  // namespace

bool ENode::HasSide(GraphKind kind) const {
  for (const Origin& o : origins) {
    if (o.kind == kind) return true;
  }
  return false;
}

std::string EGraph::OriginLabel(const Origin& o) {
  return absl::StrCat(o.kind == GraphKind::kBaseline ? "B." : "D.", o.id);
}

EGraph::Key EGraph::KeyOf(ENodeId n) const {
  Key k{nodes_[n].op, nodes_[n].children, nodes_[n].key};
  for (ClassId& c : k.children) c = Find(c);
  return k;
}

ENodeId EGraph::Add(OpKind op, std::vector<ClassId> children, std::string key,
                    std::optional<int64_t> rank, Shape shape, DType dtype,
                    std::optional<Origin> origin) {
  for (ClassId& c : children) c = Find(c);
  Key k{op, children, key};
  auto it = memo_.find(k);
  ENodeId n;
  if (it != memo_.end()) {
    n = it->second;
  } else {
    n = static_cast<ENodeId>(nodes_.size());
    ENode e;
    e.op = std::move(op);
    e.children = children;
    e.key = std::move(key);
    e.rank = rank;
    nodes_.push_back(std::move(e));
    ClassId c = static_cast<ClassId>(uf_.size());
    uf_.push_back(c);
    node_class_.push_back(c);
    members_.push_back({n});
    users_.emplace_back();
    shape_.push_back(std::move(shape));
    dtype_.push_back(dtype);
    for (ClassId child : children) InsertSorted(users_[Find(child)], n);
    memo_.emplace(std::move(k), n);
  }
  if (origin.has_value()) {
    std::string label = OriginLabel(*origin);
    if (!origin_index_.contains(label)) {
      origin_index_.emplace(std::move(label), n);
      nodes_[n].origins.push_back(*std::move(origin));
    }
  }
  return n;
}

ClassId EGraph::Find(ClassId c) const {
  while (uf_[c] != c) c = uf_[c];
  return c;
}

bool EGraph::Merge(ClassId a, ClassId b) {
  a = Find(a);
  b = Find(b);
  if (a == b) return false;
  if (b < a) std::swap(a, b);
  uf_[b] = a;
  ++merges_;
  members_[a] = MergeSorted(members_[a], members_[b]);
  users_[a] = MergeSorted(users_[a], users_[b]);
  pending_.insert(pending_.end(), users_[b].begin(), users_[b].end());
  members_[b].clear();
  users_[b].clear();
  merged_.insert(a);
  return true;
}

void EGraph::Rebuild() {
  while (!pending_.empty()) {
    std::vector<ENodeId> todo;
    todo.swap(pending_);
    std::sort(todo.begin(), todo.end());
    todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
    for (ENodeId n : todo) {
      Key old{nodes_[n].op, nodes_[n].children, nodes_[n].key};
      auto it = memo_.find(old);
      if (it != memo_.end() && it->second == n) memo_.erase(it);
      Key k = KeyOf(n);
      nodes_[n].children = k.children;
      auto hit = memo_.find(k);
      if (hit == memo_.end()) {
        memo_.emplace(std::move(k), n);
      } else if (hit->second != n) {
        Merge(ClassOf(hit->second), ClassOf(n));
      }
    }
  }
  for (ClassId& p : uf_) p = Find(p);
  for (ClassId c = 0; c < num_classes(); ++c) {
    if (uf_[c] != c) continue;
    // Users lists may name nodes whose children were rewritten; keep them
    // sorted and unique.
    std::vector<ENodeId>& u = users_[c];
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
  }
}

const std::vector<ENodeId>& EGraph::Members(ClassId c) const {
  c = Find(c);
  return members_[c];
}

const std::vector<ENodeId>& EGraph::Users(ClassId c) const {
  c = Find(c);
  if (c < 0 || c >= num_classes()) return Empty();
  return users_[c];
}

bool EGraph::HasSide(ClassId c, GraphKind kind) const {
  for (ENodeId n : Members(c)) {
    if (nodes_[n].HasSide(kind)) return true;
  }
  return false;
}

std::optional<ClassId> EGraph::ClassOfOrigin(GraphKind kind,
                                             absl::string_view id) const {
  std::optional<ENodeId> n = NodeOfOrigin(kind, id);
  if (!n.has_value()) return std::nullopt;
  return ClassOf(*n);
}

std::optional<ENodeId> EGraph::NodeOfOrigin(GraphKind kind,
                                            absl::string_view id) const {
  auto it = origin_index_.find(OriginLabel(Origin{kind, std::string(id)}));
  if (it == origin_index_.end()) return std::nullopt;
  return it->second;
}

std::string EGraph::ClassName(ClassId c) const {
  std::string best;
  for (ENodeId n : Members(c)) {
    for (const Origin& o : nodes_[n].origins) {
      std::string label = OriginLabel(o);
      if (best.empty() || label < best) best = std::move(label);
    }
  }
  if (best.empty()) best = absl::StrCat("%", Find(c));
  return best;
}

absl::flat_hash_set<ClassId> EGraph::TakeMergedClasses() {
  absl::flat_hash_set<ClassId> out;
  for (ClassId c : merged_) out.insert(Find(c));
  merged_.clear();
  return out;
}

bool FactDB::Insert(Fact fact, int64_t iteration, absl::string_view rule) {
  if (index_.contains(fact)) return false;
  int64_t pos = static_cast<int64_t>(facts_.size());
  index_.emplace(fact, pos);
  facts_.push_back(StoredFact{std::move(fact), iteration, std::string(rule)});
  IndexFact(pos);
  return true;
}

void FactDB::IndexFact(int64_t pos) {
  const Fact& f = facts_[pos].fact;
  std::vector<ClassId> classes = f.Classes();
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  for (ClassId c : classes) about_[c].push_back(pos);
  if (f.t >= 0) by_t_[f.t].push_back(pos);
  if (f.tp >= 0) by_tp_[f.tp].push_back(pos);
}

std::vector<int64_t> FactDB::Canonicalize(const EGraph& eg) {
  std::vector<StoredFact> old;
  old.swap(facts_);
  index_.clear();
  about_.clear();
  by_t_.clear();
  by_tp_.clear();
  std::vector<int64_t> changed;
  for (StoredFact& s : old) {
    Fact before = s.fact;
    s.fact.MapClasses([&](ClassId c) { return eg.Find(c); });
    bool moved = !(before == s.fact);
    if (index_.contains(s.fact)) continue;
    int64_t pos = static_cast<int64_t>(facts_.size());
    index_.emplace(s.fact, pos);
    facts_.push_back(std::move(s));
    IndexFact(pos);
    if (moved) changed.push_back(pos);
  }
  return changed;
}

std::optional<int64_t> FactDB::PositionOf(const Fact& fact) const {
  auto it = index_.find(fact);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<int64_t>& FactDB::About(ClassId c) const {
  static const std::vector<int64_t>* const kNone = new std::vector<int64_t>();
  auto it = about_.find(c);
  return it == about_.end() ? *kNone : it->second;
}

std::vector<const Fact*> FactDB::WithT(FactKind kind, ClassId c) const {
  std::vector<const Fact*> out;
  auto it = by_t_.find(c);
  if (it == by_t_.end()) return out;
  for (int64_t pos : it->second) {
    if (facts_[pos].fact.kind == kind) out.push_back(&facts_[pos].fact);
  }
  return out;
}

std::vector<const Fact*> FactDB::WithTp(FactKind kind, ClassId c) const {
  std::vector<const Fact*> out;
  auto it = by_tp_.find(c);
  if (it == by_tp_.end()) return out;
  for (int64_t pos : it->second) {
    if (facts_[pos].fact.kind == kind) out.push_back(&facts_[pos].fact);
  }
  return out;
}

}  // namespace graphcheck
