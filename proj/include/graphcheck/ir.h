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

#ifndef GRAPHCHECK_IR_H_
#define GRAPHCHECK_IR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"

namespace graphcheck {

enum class DType { kF32, kBF16, kF16, kI32, kExact };

absl::string_view DTypeName(DType dtype);
absl::StatusOr<DType> ParseDType(absl::string_view name);

// Result dtype of an op whose operands disagree: the least precise operand
// wins, so a single low-precision operand contaminates the result.
DType PromoteDType(DType a, DType b);

// Ordered tensor extents. Rank-0 tensors (scalars) have no dims.
struct Shape {
  std::vector<int64_t> dims;

  Shape() = default;
  Shape(std::initializer_list<int64_t> d) : dims(d) {}
  explicit Shape(std::vector<int64_t> d) : dims(std::move(d)) {}

  int64_t rank() const { return static_cast<int64_t>(dims.size()); }
  int64_t operator[](int64_t i) const { return dims[i]; }
  int64_t NumElements() const;
  // Product of dims[0, end).
  int64_t PrefixProduct(int64_t end) const;
  std::string ToString() const;  // "(2,3)"

  friend bool operator==(const Shape&, const Shape&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const Shape& s) {
    return H::combine(std::move(h), s.dims);
  }
};

struct SourceLoc {
  std::string file;
  int64_t line = 0;
  std::string expr;

  std::string ToString() const;  // "file:line"
  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

// Combiners of reductions and partial relations. kAddConcat only appears in
// relations: a partial sum whose reduced value is destined to be scattered.
enum class Combiner { kAdd, kMax, kAddConcat };

absl::string_view CombinerName(Combiner c);
absl::StatusOr<Combiner> ParseCombiner(absl::string_view name);

struct ReplicaGroup {
  std::vector<int64_t> ranks;

  int64_t size() const { return static_cast<int64_t>(ranks.size()); }
  // Position of `rank` within the group, or -1.
  int64_t PositionOf(int64_t rank) const;
  std::string ToString() const;  // "[0,1,2,3]"

  friend bool operator==(const ReplicaGroup&, const ReplicaGroup&) = default;
  friend auto operator<=>(const ReplicaGroup&, const ReplicaGroup&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const ReplicaGroup& g) {
    return H::combine(std::move(h), g.ranks);
  }
};

absl::Status ValidateReplicaGroup(const ReplicaGroup& group);

enum class OpCode {
  kInput,
  kConstant,
  kElemOp,
  kDot,
  kTranspose,
  kReshape,
  kSlice,
  kMaxReduce,
  kSumReduce,
  kConvert,
  kAllReduce,
  kAllGather,
  kReduceScatter,
  kConcat,
};

absl::string_view OpCodeName(OpCode code);
absl::StatusOr<OpCode> ParseOpCode(absl::string_view name);

// An operator together with its attributes. Only the attributes relevant to
// `code` are meaningful; the rest keep their defaults so that equality and
// hashing are purely structural.
struct OpKind {
  OpCode code = OpCode::kInput;
  std::string name;           // elem_op
  std::vector<int64_t> perm;  // transpose
  Shape target;               // reshape
  int64_t dim = 0;            // slice, reductions, gather/scatter, concat
  int64_t start = 0;          // slice
  int64_t length = 0;         // slice
  DType dtype = DType::kF32;  // convert
  ReplicaGroup group;         // collectives
  Combiner combiner = Combiner::kAdd;  // all_reduce, reduce_scatter
  int64_t value = 0;                   // constant fill value

  static OpKind Input() { return OpKind{}; }
  static OpKind Constant(int64_t value);
  static OpKind Elem(std::string name);
  static OpKind Dot();
  static OpKind Transpose(std::vector<int64_t> perm);
  static OpKind Reshape(Shape target);
  static OpKind Slice(int64_t dim, int64_t start, int64_t length);
  static OpKind MaxReduce(int64_t dim);
  static OpKind SumReduce(int64_t dim);
  static OpKind Convert(DType dtype);
  static OpKind AllReduce(ReplicaGroup group, Combiner combiner);
  static OpKind AllGather(int64_t dim, ReplicaGroup group);
  static OpKind ReduceScatter(int64_t dim, ReplicaGroup group,
                              Combiner combiner);
  static OpKind Concat(int64_t dim);

  bool IsCollective() const {
    return code == OpCode::kAllReduce || code == OpCode::kAllGather ||
           code == OpCode::kReduceScatter;
  }
  bool IsLayout() const {
    return code == OpCode::kTranspose || code == OpCode::kReshape;
  }
  // "dot", "transpose(1,0)", "all_reduce([0,1],add)", ...
  std::string ToString() const;

  friend bool operator==(const OpKind&, const OpKind&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const OpKind& op) {
    return H::combine(std::move(h), op.code, op.name, op.perm, op.target,
                      op.dim, op.start, op.length, op.dtype, op.group,
                      op.combiner, op.value);
  }
};

// Infers the result shape of `op` applied to operands of the given shapes.
absl::StatusOr<Shape> InferShape(const OpKind& op,
                                 absl::Span<const Shape> inputs);

struct TensorNode {
  std::string id;
  OpKind op;
  std::vector<std::string> inputs;
  Shape shape;
  DType dtype = DType::kF32;
  // Set on distributed nodes that exist on a single device only.
  std::optional<int64_t> rank;
  std::optional<SourceLoc> loc;
  std::optional<int64_t> layer;

  friend bool operator==(const TensorNode&, const TensorNode&) = default;
};

enum class GraphKind { kBaseline, kDistributed };

absl::string_view GraphKindName(GraphKind kind);

// A DAG of tensor nodes. Node order is the insertion order; lookups are by id.
class Graph {
 public:
  Graph() = default;
  explicit Graph(GraphKind kind) : kind_(kind) {}

  GraphKind kind() const { return kind_; }
  void set_kind(GraphKind kind) { kind_ = kind; }

  absl::Status AddNode(TensorNode node);
  void AddOutput(std::string id) { outputs_.push_back(std::move(id)); }
  void set_outputs(std::vector<std::string> ids) { outputs_ = std::move(ids); }

  const std::vector<TensorNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  int64_t size() const { return static_cast<int64_t>(nodes_.size()); }

  const TensorNode* Find(absl::string_view id) const;
  const TensorNode& Get(absl::string_view id) const;
  // Index into nodes(), or -1.
  int64_t IndexOf(absl::string_view id) const;
  // Mutable access for graph surgery (bug injection). Invalidates nothing.
  TensorNode* FindMutable(absl::string_view id);
  // Removes a node; callers must rewire its consumers first.
  void RemoveNode(absl::string_view id);

  // Consumers of each node, by node index, ascending.
  std::vector<std::vector<int64_t>> Consumers() const;

  // Structural equality: same kind, outputs, and node set (keyed by id).
  bool StructurallyEquals(const Graph& other) const;

 private:
  GraphKind kind_ = GraphKind::kBaseline;
  std::vector<TensorNode> nodes_;
  std::vector<std::string> outputs_;
  absl::flat_hash_map<std::string, int64_t> index_;
};

enum class RelationKindTag { kShard, kReplicate };

struct AnnotationEntry {
  std::string baseline_id;
  std::vector<std::string> distributed_ids;
  RelationKindTag kind = RelationKindTag::kReplicate;
  int64_t dim = 0;  // shard only
  ReplicaGroup group;

  friend bool operator==(const AnnotationEntry&,
                         const AnnotationEntry&) = default;
};

struct AnnotationSet {
  std::vector<AnnotationEntry> entries;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

// Checks that every annotation resolves against the two graphs.
absl::Status ValidateAnnotations(const AnnotationSet& ann, const Graph& base,
                                 const Graph& dist);

// The set of ranks named by any annotation, ascending.
ReplicaGroup WorldOf(const AnnotationSet& ann);

enum class ValidationCode {
  kDuplicateId,
  kUnknownInput,
  kMissingOutput,
  kCycle,
  kArity,
  kNotAPermutation,
  kElementCountMismatch,
  kShapeMismatch,
  kBadAttribute,
  kDTypeMismatch,
  kCollectiveInBaseline,
  kRankInBaseline,
  kRankPlacement,
  kLayerOrder,
};

absl::string_view ValidationCodeName(ValidationCode code);

struct ValidationError {
  std::string node_id;
  ValidationCode code;
  std::string message;

  std::string ToString() const;
};

// Returns every invariant violation found; empty iff the graph is valid.
std::vector<ValidationError> ValidateGraph(const Graph& g);

// Node indices in a deterministic topological order (ties broken by id).
absl::StatusOr<std::vector<int64_t>> TopologicalOrder(const Graph& g);

// A stage is a list of groups; each group is a list of node ids. Every node
// in stage k depends only on nodes in stages < k.
using Stage = std::vector<std::vector<std::string>>;

absl::StatusOr<std::vector<Stage>> TopoStages(const Graph& g);

}  // namespace graphcheck

#endif  // GRAPHCHECK_IR_H_
