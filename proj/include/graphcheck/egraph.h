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

#ifndef GRAPHCHECK_EGRAPH_H_
#define GRAPHCHECK_EGRAPH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "graphcheck/ir.h"
#include "graphcheck/relation.h"

namespace graphcheck {

using ENodeId = int32_t;

// A graph node that an e-node was registered from.
struct Origin {
  GraphKind kind = GraphKind::kBaseline;
  std::string id;

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct ENode {
  OpKind op;
  std::vector<ClassId> children;
  // Keeps apart nodes that are structurally equal but denote different
  // values: leaves by origin, rank-local distributed nodes by rank.
  std::string key;
  // Rank of a rank-local distributed node.
  std::optional<int64_t> rank;
  std::vector<Origin> origins;

  bool HasSide(GraphKind kind) const;
};

// Hashconsed e-nodes over a union-find of e-classes. Merges are deferred:
// congruence is repaired by Rebuild().
class EGraph {
 public:
  // Returns the e-node for (op, children, key); a hashcons hit records the
  // extra origin on the existing node.
  ENodeId Add(OpKind op, std::vector<ClassId> children, std::string key,
              std::optional<int64_t> rank, Shape shape, DType dtype,
              std::optional<Origin> origin);

  ClassId Find(ClassId c) const;
  ClassId ClassOf(ENodeId n) const { return Find(node_class_[n]); }

  // Unions two classes; the smaller id becomes the representative. Returns
  // false if they were already equal.
  bool Merge(ClassId a, ClassId b);

  // Restores the hashcons and congruence invariants after merges.
  void Rebuild();
  bool NeedsRebuild() const { return !pending_.empty(); }

  const ENode& node(ENodeId n) const { return nodes_[n]; }
  int32_t num_nodes() const { return static_cast<int32_t>(nodes_.size()); }
  int32_t num_classes() const { return static_cast<int32_t>(uf_.size()); }
  int64_t num_merges() const { return merges_; }

  // E-nodes in a canonical class, ascending.
  const std::vector<ENodeId>& Members(ClassId c) const;
  // E-nodes that use a canonical class as a child, ascending.
  const std::vector<ENodeId>& Users(ClassId c) const;

  const Shape& ShapeOf(ClassId c) const { return shape_[Find(c)]; }
  DType DTypeOf(ClassId c) const { return dtype_[Find(c)]; }
  bool HasSide(ClassId c, GraphKind kind) const;

  // Class of a registered graph node, if any.
  std::optional<ClassId> ClassOfOrigin(GraphKind kind,
                                       absl::string_view id) const;
  std::optional<ENodeId> NodeOfOrigin(GraphKind kind,
                                      absl::string_view id) const;

  // Stable display name: the smallest origin label in the class, where
  // labels are "B.<id>" and "D.<id>".
  std::string ClassName(ClassId c) const;

  // Canonical classes touched by merges since the last call.
  absl::flat_hash_set<ClassId> TakeMergedClasses();

 private:
  struct Key {
    OpKind op;
    std::vector<ClassId> children;
    std::string key;

    friend bool operator==(const Key&, const Key&) = default;
    template <typename H>
    friend H AbslHashValue(H h, const Key& k) {
      return H::combine(std::move(h), k.op, k.children, k.key);
    }
  };

  Key KeyOf(ENodeId n) const;
  static std::string OriginLabel(const Origin& o);

  std::vector<ENode> nodes_;
  std::vector<ClassId> node_class_;
  std::vector<ClassId> uf_;  // flattened by Rebuild()
  std::vector<std::vector<ENodeId>> members_;
  std::vector<std::vector<ENodeId>> users_;
  std::vector<Shape> shape_;
  std::vector<DType> dtype_;
  absl::flat_hash_map<Key, ENodeId> memo_;
  absl::flat_hash_map<std::string, ENodeId> origin_index_;
  std::vector<ENodeId> pending_;
  absl::flat_hash_set<ClassId> merged_;
  int64_t merges_ = 0;
};

// A committed fact with its provenance.
struct StoredFact {
  Fact fact;
  int64_t iteration = 0;  // first iteration that derived it
  std::string rule;       // first rule that derived it
};

// Facts over canonical class ids, indexed by class. Facts are never removed;
// canonicalization after merges may fold two facts into one.
class FactDB {
 public:
  // Returns false if an equal fact is already present.
  bool Insert(Fact fact, int64_t iteration, absl::string_view rule);
  bool Contains(const Fact& fact) const { return index_.contains(fact); }
  std::optional<int64_t> PositionOf(const Fact& fact) const;

  // Rewrites every class id to its representative and folds duplicates.
  // Returns the positions of facts whose ids changed.
  std::vector<int64_t> Canonicalize(const EGraph& eg);

  const std::vector<StoredFact>& facts() const { return facts_; }
  int64_t size() const { return static_cast<int64_t>(facts_.size()); }

  // Positions of facts mentioning class c in any field, ascending.
  const std::vector<int64_t>& About(ClassId c) const;
  // Positions of facts of `kind` whose baseline (t) or distributed (tp)
  // field is c.
  std::vector<const Fact*> WithT(FactKind kind, ClassId c) const;
  std::vector<const Fact*> WithTp(FactKind kind, ClassId c) const;

 private:
  void IndexFact(int64_t pos);

  std::vector<StoredFact> facts_;
  absl::flat_hash_map<Fact, int64_t> index_;
  absl::flat_hash_map<ClassId, std::vector<int64_t>> about_;
  absl::flat_hash_map<ClassId, std::vector<int64_t>> by_t_;
  absl::flat_hash_map<ClassId, std::vector<int64_t>> by_tp_;
};

}  // namespace graphcheck

#endif  // GRAPHCHECK_EGRAPH_H_
