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

#include "graphcheck/ir.h"

#include <algorithm>
#include <queue>
#include <set>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"

namespace graphcheck {

absl::string_view DTypeName(DType dtype) {
  switch (dtype) {
    case DType::kF32:
      return "f32";
    case DType::kBF16:
      return "bf16";
    case DType::kF16:
      return "f16";
    case DType::kI32:
      return "i32";
    case DType::kExact:
      return "exact";
  }
  return "?";
}

absl::StatusOr<DType> ParseDType(absl::string_view name) {
  for (DType d :
       {DType::kF32, DType::kBF16, DType::kF16, DType::kI32, DType::kExact}) {
    if (DTypeName(d) == name) return d;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown dtype: ", name));
}

namespace {
int PrecisionRank(DType d) {
  switch (d) {
    case DType::kExact:
      return 4;
    case DType::kF32:
      return 3;
    case DType::kF16:
      return 2;
    case DType::kBF16:
      return 1;
    case DType::kI32:
      return 0;
  }
  return 0;
}
}  // namespace

DType PromoteDType(DType a, DType b) {
  return PrecisionRank(a) <= PrecisionRank(b) ? a : b;
}

int64_t Shape::NumElements() const {
  int64_t n = 1;
  for (int64_t d : dims) n *= d;
  return n;
}

int64_t Shape::PrefixProduct(int64_t end) const {
  int64_t n = 1;
  for (int64_t i = 0; i < end; ++i) n *= dims[i];
  return n;
}

std::string Shape::ToString() const {
  return absl::StrCat("(", absl::StrJoin(dims, ","), ")");
}

std::string SourceLoc::ToString() const {
  return absl::StrCat(file, ":", line);
}

absl::string_view CombinerName(Combiner c) {
  switch (c) {
    case Combiner::kAdd:
      return "add";
    case Combiner::kMax:
      return "max";
    case Combiner::kAddConcat:
      return "add-concat";
  }
  return "?";
}

absl::StatusOr<Combiner> ParseCombiner(absl::string_view name) {
  for (Combiner c : {Combiner::kAdd, Combiner::kMax, Combiner::kAddConcat}) {
    if (CombinerName(c) == name) return c;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown combiner: ", name));
}

int64_t ReplicaGroup::PositionOf(int64_t rank) const {
  for (int64_t i = 0; i < size(); ++i) {
    if (ranks[i] == rank) return i;
  }
  return -1;
}

std::string ReplicaGroup::ToString() const {
  return absl::StrCat("[", absl::StrJoin(ranks, ","), "]");
}

absl::Status ValidateReplicaGroup(const ReplicaGroup& group) {
  if (group.ranks.empty()) {
    return absl::InvalidArgumentError("replica group is empty");
  }
  absl::flat_hash_set<int64_t> seen;
  for (int64_t r : group.ranks) {
    if (r < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative rank in replica group ", group.ToString()));
    }
    if (!seen.insert(r).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate rank in replica group ", group.ToString()));
    }
  }
  return absl::OkStatus();
}

absl::string_view OpCodeName(OpCode code) {
  switch (code) {
    case OpCode::kInput:
      return "input";
    case OpCode::kConstant:
      return "constant";
    case OpCode::kElemOp:
      return "elem_op";
    case OpCode::kDot:
      return "dot";
    case OpCode::kTranspose:
      return "transpose";
    case OpCode::kReshape:
      return "reshape";
    case OpCode::kSlice:
      return "slice";
    case OpCode::kMaxReduce:
      return "max_reduce";
    case OpCode::kSumReduce:
      return "sum_reduce";
    case OpCode::kConvert:
      return "convert";
    case OpCode::kAllReduce:
      return "all_reduce";
    case OpCode::kAllGather:
      return "all_gather";
    case OpCode::kReduceScatter:
      return "reduce_scatter";
    case OpCode::kConcat:
      return "concat";
  }
  return "?";
}

absl::StatusOr<OpCode> ParseOpCode(absl::string_view name) {
  for (int i = 0; i <= static_cast<int>(OpCode::kConcat); ++i) {
    auto code = static_cast<OpCode>(i);
    if (OpCodeName(code) == name) return code;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown op: ", name));
}

OpKind OpKind::Constant(int64_t value) {
  OpKind op;
  op.code = OpCode::kConstant;
  op.value = value;
  return op;
}

OpKind OpKind::Elem(std::string name) {
  OpKind op;
  op.code = OpCode::kElemOp;
  op.name = std::move(name);
  return op;
}

OpKind OpKind::Dot() {
  OpKind op;
  op.code = OpCode::kDot;
  return op;
}

OpKind OpKind::Transpose(std::vector<int64_t> perm) {
  OpKind op;
  op.code = OpCode::kTranspose;
  op.perm = std::move(perm);
  return op;
}

OpKind OpKind::Reshape(Shape target) {
  OpKind op;
  op.code = OpCode::kReshape;
  op.target = std::move(target);
  return op;
}

OpKind OpKind::Slice(int64_t dim, int64_t start, int64_t length) {
  OpKind op;
  op.code = OpCode::kSlice;
  op.dim = dim;
  op.start = start;
  op.length = length;
  return op;
}

OpKind OpKind::MaxReduce(int64_t dim) {
  OpKind op;
  op.code = OpCode::kMaxReduce;
  op.dim = dim;
  return op;
}

OpKind OpKind::SumReduce(int64_t dim) {
  OpKind op;
  op.code = OpCode::kSumReduce;
  op.dim = dim;
  return op;
}

OpKind OpKind::Convert(DType dtype) {
  OpKind op;
  op.code = OpCode::kConvert;
  op.dtype = dtype;
  return op;
}

OpKind OpKind::AllReduce(ReplicaGroup group, Combiner combiner) {
  OpKind op;
  op.code = OpCode::kAllReduce;
  op.group = std::move(group);
  op.combiner = combiner;
  return op;
}

OpKind OpKind::AllGather(int64_t dim, ReplicaGroup group) {
  OpKind op;
  op.code = OpCode::kAllGather;
  op.dim = dim;
  op.group = std::move(group);
  return op;
}

OpKind OpKind::ReduceScatter(int64_t dim, ReplicaGroup group,
                             Combiner combiner) {
  OpKind op;
  op.code = OpCode::kReduceScatter;
  op.dim = dim;
  op.group = std::move(group);
  op.combiner = combiner;
  return op;
}

OpKind OpKind::Concat(int64_t dim) {
  OpKind op;
  op.code = OpCode::kConcat;
  op.dim = dim;
  return op;
}

std::string OpKind::ToString() const {
  switch (code) {
    case OpCode::kInput:
    case OpCode::kDot:
      return std::string(OpCodeName(code));
    case OpCode::kConstant:
      return absl::StrCat("constant(", value, ")");
    case OpCode::kElemOp:
      return absl::StrCat("elem_op(", name, ")");
    case OpCode::kTranspose:
      return absl::StrCat("transpose(", absl::StrJoin(perm, ","), ")");
    case OpCode::kReshape:
      return absl::StrCat("reshape", target.ToString());
    case OpCode::kSlice:
      return absl::StrCat("slice(", dim, ",", start, ",", length, ")");
    case OpCode::kMaxReduce:
    case OpCode::kSumReduce:
    case OpCode::kConcat:
      return absl::StrCat(OpCodeName(code), "(", dim, ")");
    case OpCode::kConvert:
      return absl::StrCat("convert(", DTypeName(dtype), ")");
    case OpCode::kAllReduce:
      return absl::StrCat("all_reduce(", group.ToString(), ",",
                          CombinerName(combiner), ")");
    case OpCode::kAllGather:
      return absl::StrCat("all_gather(", dim, ",", group.ToString(), ")");
    case OpCode::kReduceScatter:
      return absl::StrCat("reduce_scatter(", dim, ",", group.ToString(), ",",
                          CombinerName(combiner), ")");
  }
  return "?";
}

namespace {

absl::Status CheckPermutation(absl::Span<const int64_t> perm, int64_t rank) {
  if (static_cast<int64_t>(perm.size()) != rank) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "permutation of length %d on rank-%d tensor", perm.size(), rank));
  }
  std::vector<bool> seen(rank, false);
  for (int64_t p : perm) {
    if (p < 0 || p >= rank || seen[p]) {
      return absl::InvalidArgumentError(
          absl::StrCat("not a permutation: (", absl::StrJoin(perm, ","), ")"));
    }
    seen[p] = true;
  }
  return absl::OkStatus();
}

absl::Status CheckDim(int64_t dim, const Shape& s) {
  if (dim < 0 || dim >= s.rank()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dim %d out of range for shape %s", dim, s.ToString()));
  }
  return absl::OkStatus();
}

absl::Status Arity(const OpKind& op, absl::Span<const Shape> inputs, size_t lo,
                   size_t hi) {
  if (inputs.size() < lo || inputs.size() > hi) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s takes %d..%d operands, got %d", op.ToString(), lo,
                        hi, inputs.size()));
  }
  return absl::OkStatus();
}

absl::Status SameShapes(absl::Span<const Shape> inputs) {
  for (const Shape& s : inputs) {
    if (s != inputs[0]) {
      return absl::InvalidArgumentError(
          absl::StrCat("operand shapes differ: ", inputs[0].ToString(), " vs ",
                       s.ToString()));
    }
  }
  return absl::OkStatus();
}

// Collectives take one SPMD operand or one rank-local operand per group member.
absl::Status CollectiveArity(const OpKind& op, absl::Span<const Shape> inputs) {
  if (absl::Status s = ValidateReplicaGroup(op.group); !s.ok()) return s;
  if (inputs.size() != 1 &&
      static_cast<int64_t>(inputs.size()) != op.group.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s takes 1 or %d operands, got %d", op.ToString(),
                        op.group.size(), inputs.size()));
  }
  return SameShapes(inputs);
}

}  // namespace

absl::StatusOr<Shape> InferShape(const OpKind& op,
                                 absl::Span<const Shape> inputs) {
  switch (op.code) {
    case OpCode::kInput:
    case OpCode::kConstant:
      if (absl::Status s = Arity(op, inputs, 0, 0); !s.ok()) return s;
      return absl::InvalidArgumentError(
          "leaf shapes are declared, not inferred");
    case OpCode::kElemOp: {
      if (absl::Status s = Arity(op, inputs, 1, 3); !s.ok()) return s;
      if (op.name.empty()) {
        return absl::InvalidArgumentError("elem_op without a name");
      }
      const Shape* full = nullptr;
      for (const Shape& s : inputs) {
        if (s.rank() == 0) continue;
        if (full != nullptr && *full != s) {
          return absl::InvalidArgumentError(
              absl::StrCat("elem_op operand shapes differ: ", full->ToString(),
                           " vs ", s.ToString()));
        }
        full = &s;
      }
      return full == nullptr ? Shape{} : *full;
    }
    case OpCode::kDot: {
      if (absl::Status s = Arity(op, inputs, 2, 2); !s.ok()) return s;
      const Shape& x = inputs[0];
      const Shape& y = inputs[1];
      if (x.rank() < 2 || y.rank() < 2) {
        return absl::InvalidArgumentError("dot operands must have rank >= 2");
      }
      if (y.rank() != 2 && y.rank() != x.rank()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "dot rhs must be rank 2 or match lhs rank: ", x.ToString(), " x ",
            y.ToString()));
      }
      const int64_t r = x.rank();
      const int64_t k = x[r - 1];
      const int64_t yk = y[y.rank() - 2];
      if (k != yk) {
        return absl::InvalidArgumentError(
            absl::StrCat("dot contracted extents differ: ", x.ToString(), " x ",
                         y.ToString()));
      }
      std::vector<int64_t> out(x.dims.begin(), x.dims.end() - 1);
      if (y.rank() == r && r > 2) {
        for (int64_t i = 0; i < r - 2; ++i) {
          if (x[i] != y[i]) {
            return absl::InvalidArgumentError(
                absl::StrCat("dot batch extents differ: ", x.ToString(), " x ",
                             y.ToString()));
          }
        }
      }
      out.push_back(y[y.rank() - 1]);
      return Shape(std::move(out));
    }
    case OpCode::kTranspose: {
      if (absl::Status s = Arity(op, inputs, 1, 1); !s.ok()) return s;
      if (absl::Status s = CheckPermutation(op.perm, inputs[0].rank());
          !s.ok()) {
        return s;
      }
      std::vector<int64_t> out;
      for (int64_t p : op.perm) out.push_back(inputs[0][p]);
      return Shape(std::move(out));
    }
    case OpCode::kReshape: {
      if (absl::Status s = Arity(op, inputs, 1, 1); !s.ok()) return s;
      for (int64_t d : op.target.dims) {
        if (d < 1) {
          return absl::InvalidArgumentError(absl::StrCat(
              "reshape target has non-positive dim: ", op.target.ToString()));
        }
      }
      if (op.target.NumElements() != inputs[0].NumElements()) {
        return absl::InvalidArgumentError(
            absl::StrCat("element count mismatch: ", inputs[0].ToString(),
                         " -> ", op.target.ToString()));
      }
      return op.target;
    }
    case OpCode::kSlice: {
      if (absl::Status s = Arity(op, inputs, 1, 1); !s.ok()) return s;
      if (absl::Status s = CheckDim(op.dim, inputs[0]); !s.ok()) return s;
      if (op.start < 0 || op.length < 1 ||
          op.start + op.length > inputs[0][op.dim]) {
        return absl::InvalidArgumentError(
            absl::StrFormat("slice [%d,+%d) exceeds extent %d", op.start,
                            op.length, inputs[0][op.dim]));
      }
      Shape out = inputs[0];
      out.dims[op.dim] = op.length;
      return out;
    }
    case OpCode::kMaxReduce:
    case OpCode::kSumReduce: {
      if (absl::Status s = Arity(op, inputs, 1, 1); !s.ok()) return s;
      if (absl::Status s = CheckDim(op.dim, inputs[0]); !s.ok()) return s;
      Shape out = inputs[0];
      out.dims.erase(out.dims.begin() + op.dim);
      return out;
    }
    case OpCode::kConvert:
      if (absl::Status s = Arity(op, inputs, 1, 1); !s.ok()) return s;
      return inputs[0];
    case OpCode::kAllReduce:
      if (absl::Status s = CollectiveArity(op, inputs); !s.ok()) return s;
      if (op.combiner == Combiner::kAddConcat) {
        return absl::InvalidArgumentError("add-concat is not an op combiner");
      }
      return inputs[0];
    case OpCode::kAllGather: {
      if (absl::Status s = CollectiveArity(op, inputs); !s.ok()) return s;
      if (absl::Status s = CheckDim(op.dim, inputs[0]); !s.ok()) return s;
      Shape out = inputs[0];
      out.dims[op.dim] *= op.group.size();
      return out;
    }
    case OpCode::kReduceScatter: {
      if (absl::Status s = CollectiveArity(op, inputs); !s.ok()) return s;
      if (absl::Status s = CheckDim(op.dim, inputs[0]); !s.ok()) return s;
      if (op.combiner == Combiner::kAddConcat) {
        return absl::InvalidArgumentError("add-concat is not an op combiner");
      }
      if (inputs[0][op.dim] % op.group.size() != 0) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "reduce_scatter extent %d not divisible by group size %d",
            inputs[0][op.dim], op.group.size()));
      }
      Shape out = inputs[0];
      out.dims[op.dim] /= op.group.size();
      return out;
    }
    case OpCode::kConcat: {
      if (absl::Status s = Arity(op, inputs, 1, 64); !s.ok()) return s;
      if (absl::Status s = CheckDim(op.dim, inputs[0]); !s.ok()) return s;
      Shape out = inputs[0];
      out.dims[op.dim] = 0;
      for (const Shape& s : inputs) {
        if (s.rank() != out.rank()) {
          return absl::InvalidArgumentError("concat operand ranks differ");
        }
        for (int64_t i = 0; i < s.rank(); ++i) {
          if (i != op.dim && s[i] != inputs[0][i]) {
            return absl::InvalidArgumentError(absl::StrCat(
                "concat operand shapes differ off-axis: ", inputs[0].ToString(),
                " vs ", s.ToString()));
          }
        }
        out.dims[op.dim] += s[op.dim];
      }
      return out;
    }
  }
  return absl::InternalError("unhandled op");
}

absl::string_view GraphKindName(GraphKind kind) {
  return kind == GraphKind::kBaseline ? "baseline" : "distributed";
}

absl::Status Graph::AddNode(TensorNode node) {
  if (index_.contains(node.id)) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate node id: ", node.id));
  }
  index_[node.id] = static_cast<int64_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return absl::OkStatus();
}

const TensorNode* Graph::Find(absl::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

const TensorNode& Graph::Get(absl::string_view id) const { return *Find(id); }

int64_t Graph::IndexOf(absl::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

TensorNode* Graph::FindMutable(absl::string_view id) {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

void Graph::RemoveNode(absl::string_view id) {
  int64_t idx = IndexOf(id);
  if (idx < 0) return;
  nodes_.erase(nodes_.begin() + idx);
  index_.clear();
  for (int64_t i = 0; i < size(); ++i) index_[nodes_[i].id] = i;
}

std::vector<std::vector<int64_t>> Graph::Consumers() const {
  std::vector<std::vector<int64_t>> consumers(nodes_.size());
  for (int64_t i = 0; i < size(); ++i) {
    for (const std::string& in : nodes_[i].inputs) {
      int64_t j = IndexOf(in);
      if (j >= 0 && (consumers[j].empty() || consumers[j].back() != i)) {
        consumers[j].push_back(i);
      }
    }
  }
  return consumers;
}

bool Graph::StructurallyEquals(const Graph& other) const {
  if (kind_ != other.kind_ || outputs_ != other.outputs_ ||
      nodes_.size() != other.nodes_.size()) {
    return false;
  }
  for (const TensorNode& n : nodes_) {
    const TensorNode* m = other.Find(n.id);
    if (m == nullptr || !(*m == n)) return false;
  }
  return true;
}

absl::Status ValidateAnnotations(const AnnotationSet& ann, const Graph& base,
                                 const Graph& dist) {
  for (const AnnotationEntry& e : ann.entries) {
    const TensorNode* b = base.Find(e.baseline_id);
    if (b == nullptr) {
      return absl::NotFoundError(absl::StrCat(
          "annotation names unknown baseline node ", e.baseline_id));
    }
    if (absl::Status s = ValidateReplicaGroup(e.group); !s.ok()) return s;
    if (e.distributed_ids.size() != 1 &&
        static_cast<int64_t>(e.distributed_ids.size()) != e.group.size()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "annotation for %s lists %d distributed ids for a group of %d",
          e.baseline_id, e.distributed_ids.size(), e.group.size()));
    }
    for (const std::string& id : e.distributed_ids) {
      if (id != e.distributed_ids[0]) {
        return absl::InvalidArgumentError(absl::StrCat(
            "annotation for ", e.baseline_id,
            " names distinct per-rank nodes; SPMD graphs use one id"));
      }
    }
    const TensorNode* d = dist.Find(e.distributed_ids[0]);
    if (d == nullptr) {
      return absl::NotFoundError(absl::StrCat(
          "annotation names unknown distributed node ", e.distributed_ids[0]));
    }
    if (e.kind == RelationKindTag::kShard) {
      if (e.dim < 0 || e.dim >= b->shape.rank()) {
        return absl::InvalidArgumentError(
            absl::StrFormat("shard dim %d out of range for %s%s", e.dim,
                            e.baseline_id, b->shape.ToString()));
      }
      Shape expect = b->shape;
      if (expect.dims[e.dim] % e.group.size() != 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "shard of ", e.baseline_id, " not divisible by group size"));
      }
      expect.dims[e.dim] /= e.group.size();
      if (expect != d->shape) {
        return absl::InvalidArgumentError(absl::StrCat(
            "shard of ", e.baseline_id, b->shape.ToString(), " expects local ",
            expect.ToString(), ", distributed node has ", d->shape.ToString()));
      }
    } else if (b->shape != d->shape) {
      return absl::InvalidArgumentError(absl::StrCat(
          "replicated ", e.baseline_id, " has shape ", b->shape.ToString(),
          " but distributed node has ", d->shape.ToString()));
    }
  }
  return absl::OkStatus();
}

ReplicaGroup WorldOf(const AnnotationSet& ann) {
  std::set<int64_t> ranks;
  for (const AnnotationEntry& e : ann.entries) {
    ranks.insert(e.group.ranks.begin(), e.group.ranks.end());
  }
  return ReplicaGroup{{ranks.begin(), ranks.end()}};
}

absl::string_view ValidationCodeName(ValidationCode code) {
  switch (code) {
    case ValidationCode::kDuplicateId:
      return "DuplicateId";
    case ValidationCode::kUnknownInput:
      return "UnknownInput";
    case ValidationCode::kMissingOutput:
      return "MissingOutput";
    case ValidationCode::kCycle:
      return "Cycle";
    case ValidationCode::kArity:
      return "Arity";
    case ValidationCode::kNotAPermutation:
      return "NotAPermutation";
    case ValidationCode::kElementCountMismatch:
      return "ElementCountMismatch";
    case ValidationCode::kShapeMismatch:
      return "ShapeMismatch";
    case ValidationCode::kBadAttribute:
      return "BadAttribute";
    case ValidationCode::kDTypeMismatch:
      return "DTypeMismatch";
    case ValidationCode::kCollectiveInBaseline:
      return "CollectiveInBaseline";
    case ValidationCode::kRankInBaseline:
      return "RankInBaseline";
    case ValidationCode::kRankPlacement:
      return "RankPlacement";
    case ValidationCode::kLayerOrder:
      return "LayerOrder";
  }
  return "?";
}

std::string ValidationError::ToString() const {
  return absl::StrCat(ValidationCodeName(code), " at ", node_id, ": ", message);
}

namespace {

ValidationCode ClassifyShapeError(const OpKind& op, absl::string_view message) {
  if (op.code == OpCode::kTranspose &&
      absl::StrContains(message, "permutation")) {
    return ValidationCode::kNotAPermutation;
  }
  if (absl::StrContains(message, "element count")) {
    return ValidationCode::kElementCountMismatch;
  }
  if (absl::StrContains(message, "operands, got")) {
    return ValidationCode::kArity;
  }
  if (absl::StrContains(message, "group") ||
      absl::StrContains(message, "without a name") ||
      absl::StrContains(message, "combiner") ||
      absl::StrContains(message, "out of range") ||
      absl::StrContains(message, "exceeds")) {
    return ValidationCode::kBadAttribute;
  }
  return ValidationCode::kShapeMismatch;
}

}  // namespace

std::vector<ValidationError> ValidateGraph(const Graph& g) {
  std::vector<ValidationError> errors;
  auto report = [&](const std::string& id, ValidationCode code,
                    std::string message) {
    errors.push_back({id, code, std::move(message)});
  };

  for (const std::string& out : g.outputs()) {
    if (g.Find(out) == nullptr) {
      report(out, ValidationCode::kMissingOutput,
             "output names a node that does not exist");
    }
  }
  bool inputs_resolve = true;
  for (const TensorNode& n : g.nodes()) {
    for (const std::string& in : n.inputs) {
      if (g.Find(in) == nullptr) {
        report(n.id, ValidationCode::kUnknownInput,
               absl::StrCat("unknown input ", in));
        inputs_resolve = false;
      }
    }
  }
  if (!inputs_resolve) return errors;

  absl::StatusOr<std::vector<int64_t>> order = TopologicalOrder(g);
  if (!order.ok()) {
    report("", ValidationCode::kCycle, std::string(order.status().message()));
    return errors;
  }

  for (int64_t idx : *order) {
    const TensorNode& n = g.nodes()[idx];
    for (int64_t d : n.shape.dims) {
      if (d < 1) {
        report(n.id, ValidationCode::kShapeMismatch,
               absl::StrCat("non-positive extent in ", n.shape.ToString()));
      }
    }
    if (g.kind() == GraphKind::kBaseline) {
      if (n.op.IsCollective()) {
        report(n.id, ValidationCode::kCollectiveInBaseline,
               absl::StrCat(n.op.ToString(), " in a baseline graph"));
      }
      if (n.rank.has_value()) {
        report(n.id, ValidationCode::kRankInBaseline,
               "baseline nodes carry no rank");
      }
    }
    std::vector<Shape> in_shapes;
    std::vector<const TensorNode*> ins;
    for (const std::string& in : n.inputs) {
      ins.push_back(g.Find(in));
      in_shapes.push_back(ins.back()->shape);
    }
    if (n.op.code == OpCode::kInput || n.op.code == OpCode::kConstant) {
      if (!n.inputs.empty()) {
        report(n.id, ValidationCode::kArity, "leaf nodes take no operands");
      }
    } else {
      absl::StatusOr<Shape> inferred = InferShape(n.op, in_shapes);
      if (!inferred.ok()) {
        report(n.id, ClassifyShapeError(n.op, inferred.status().message()),
               std::string(inferred.status().message()));
      } else if (*inferred != n.shape) {
        report(n.id,
               n.op.code == OpCode::kReshape
                   ? ValidationCode::kElementCountMismatch
                   : ValidationCode::kShapeMismatch,
               absl::StrCat("declared shape ", n.shape.ToString(),
                            " but inferred ", inferred->ToString()));
      }
      DType expect = n.op.code == OpCode::kConvert ? n.op.dtype : ins[0]->dtype;
      if (n.op.code != OpCode::kConvert) {
        for (const TensorNode* in : ins)
          expect = PromoteDType(expect, in->dtype);
      }
      if (expect != n.dtype) {
        report(n.id, ValidationCode::kDTypeMismatch,
               absl::StrCat("declared ", DTypeName(n.dtype),
                            " but operands give ", DTypeName(expect)));
      }
    }
    // Rank placement: rank-local nodes read SPMD nodes or nodes on the same
    // rank; SPMD non-collectives never read rank-local nodes; per-rank
    // collective operand i lives on group.ranks[i].
    for (size_t i = 0; i < ins.size(); ++i) {
      const TensorNode* in = ins[i];
      if (!in->rank.has_value()) continue;
      bool ok;
      if (n.op.IsCollective() && ins.size() > 1) {
        ok = !n.rank.has_value() && i < n.op.group.ranks.size() &&
             *in->rank == n.op.group.ranks[i];
      } else {
        ok = n.rank.has_value() && *n.rank == *in->rank;
      }
      if (!ok) {
        report(n.id, ValidationCode::kRankPlacement,
               absl::StrCat("operand ", in->id, " lives on rank ", *in->rank));
      }
    }
    if (n.op.IsCollective() && n.rank.has_value()) {
      report(n.id, ValidationCode::kRankPlacement,
             "collectives run on every rank of their group");
    }
    if (n.layer.has_value()) {
      if (*n.layer < 0) {
        report(n.id, ValidationCode::kLayerOrder, "negative layer tag");
      }
      for (const TensorNode* in : ins) {
        if (in->layer.has_value() && *in->layer > *n.layer) {
          report(
              n.id, ValidationCode::kLayerOrder,
              absl::StrCat("reads ", in->id, " from later layer ", *in->layer));
        }
      }
    }
  }
  return errors;
}

absl::StatusOr<std::vector<int64_t>> TopologicalOrder(const Graph& g) {
  const int64_t n = g.size();
  std::vector<int64_t> pending(n, 0);
  std::vector<std::vector<int64_t>> consumers(n);
  for (int64_t i = 0; i < n; ++i) {
    for (const std::string& in : g.nodes()[i].inputs) {
      int64_t j = g.IndexOf(in);
      if (j < 0) {
        return absl::NotFoundError(absl::StrCat("unknown input ", in));
      }
      consumers[j].push_back(i);
      ++pending[i];
    }
  }
  auto by_id = [&](int64_t a, int64_t b) {
    return g.nodes()[a].id > g.nodes()[b].id;
  };
  std::priority_queue<int64_t, std::vector<int64_t>, decltype(by_id)> ready(
      by_id);
  for (int64_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<int64_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    int64_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (int64_t c : consumers[i]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int64_t>(order.size()) != n) {
    return absl::FailedPreconditionError("graph has a cycle");
  }
  return order;
}

absl::StatusOr<std::vector<Stage>> TopoStages(const Graph& g) {
  absl::StatusOr<std::vector<int64_t>> order = TopologicalOrder(g);
  if (!order.ok()) return order.status();
  std::vector<int64_t> depth(g.size(), 0);
  int64_t max_depth = -1;
  for (int64_t i : *order) {
    for (const std::string& in : g.nodes()[i].inputs) {
      depth[i] = std::max(depth[i], depth[g.IndexOf(in)] + 1);
    }
    max_depth = std::max(max_depth, depth[i]);
  }
  std::vector<Stage> stages(max_depth + 1);
  for (int64_t i : *order) {
    stages[depth[i]].push_back({g.nodes()[i].id});
  }
  for (Stage& s : stages) {
    std::sort(s.begin(), s.end());
  }
  return stages;
}

}  // namespace graphcheck
