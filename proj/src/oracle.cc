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

#include "graphcheck/oracle.h"

#include <gmpxx.h>

#include <optional>
#include <random>
#include <set>

#include "absl/container/flat_hash_map.h"
#include "absl/strings/str_cat.h"

namespace graphcheck {
namespace {

struct Tensor {
  Shape shape;
  std::vector<mpq_class> v;
  uint32_t converts = 0;  // bit per dtype this value was converted to
};

using Value = std::optional<Tensor>;

std::vector<int64_t> Strides(const Shape& s) {
  std::vector<int64_t> st(s.rank(), 1);
  for (int64_t i = s.rank() - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
  return st;
}

std::vector<int64_t> Unravel(int64_t flat, const Shape& s) {
  std::vector<int64_t> idx(s.rank(), 0);
  for (int64_t i = s.rank() - 1; i >= 0; --i) {
    idx[i] = flat % s[i];
    flat /= s[i];
  }
  return idx;
}

int64_t Ravel(const std::vector<int64_t>& idx, const Shape& s) {
  int64_t flat = 0;
  for (int64_t i = 0; i < s.rank(); ++i) flat = flat * s[i] + idx[i];
  return flat;
}

absl::StatusOr<mpq_class> ApplyElem(const std::string& name,
                                    const std::vector<mpq_class>& a) {
  auto need = [&](size_t n) -> absl::Status {
    if (a.size() != n) {
      return absl::InvalidArgumentError(
          absl::StrCat("elem_op ", name, " takes ", n, " operands"));
    }
    return absl::OkStatus();
  };
  if (name == "add" || name == "sub" || name == "mul" || name == "div" ||
      name == "max") {
    if (absl::Status s = need(2); !s.ok()) return s;
    if (name == "add") return mpq_class(a[0] + a[1]);
    if (name == "sub") return mpq_class(a[0] - a[1]);
    if (name == "mul") return mpq_class(a[0] * a[1]);
    if (name == "max") return a[0] < a[1] ? a[1] : a[0];
    if (a[1] == 0) return absl::InvalidArgumentError("division by zero");
    return mpq_class(a[0] / a[1]);
  }
  if (name == "neg" || name == "relu" || name == "sq1" || name == "copy") {
    if (absl::Status s = need(1); !s.ok()) return s;
    if (name == "neg") return mpq_class(-a[0]);
    if (name == "relu") return a[0] < 0 ? mpq_class(0) : a[0];
    if (name == "copy") return a[0];
    return mpq_class(a[0] * a[0] + 1);
  }
  return absl::UnimplementedError(
      absl::StrCat("elem_op ", name, " has no exact semantics"));
}

Tensor Combine(const std::vector<const Tensor*>& parts, Combiner op) {
  Tensor out = *parts[0];
  for (size_t p = 1; p < parts.size(); ++p) {
    out.converts |= parts[p]->converts;
    for (size_t i = 0; i < out.v.size(); ++i) {
      if (op == Combiner::kMax) {
        if (out.v[i] < parts[p]->v[i]) out.v[i] = parts[p]->v[i];
      } else {
        out.v[i] += parts[p]->v[i];
      }
    }
  }
  return out;
}

Tensor Concat(const std::vector<const Tensor*>& parts, int64_t dim) {
  Tensor out;
  out.shape = parts[0]->shape;
  out.shape.dims[dim] = 0;
  for (const Tensor* p : parts) {
    out.shape.dims[dim] += p->shape[dim];
    out.converts |= p->converts;
  }
  out.v.resize(out.shape.NumElements());
  for (int64_t k = 0; k < out.shape.NumElements(); ++k) {
    std::vector<int64_t> idx = Unravel(k, out.shape);
    int64_t at = idx[dim];
    for (const Tensor* p : parts) {
      if (at < p->shape[dim]) {
        idx[dim] = at;
        out.v[k] = p->v[Ravel(idx, p->shape)];
        break;
      }
      at -= p->shape[dim];
    }
  }
  return out;
}

Tensor SliceOf(const Tensor& x, int64_t dim, int64_t start, int64_t length) {
  Tensor out;
  out.shape = x.shape;
  out.shape.dims[dim] = length;
  out.converts = x.converts;
  out.v.resize(out.shape.NumElements());
  for (int64_t k = 0; k < out.shape.NumElements(); ++k) {
    std::vector<int64_t> idx = Unravel(k, out.shape);
    idx[dim] += start;
    out.v[k] = x.v[Ravel(idx, x.shape)];
  }
  return out;
}

// Evaluates a non-collective op.
absl::StatusOr<Tensor> Eval(const TensorNode& n,
                            const std::vector<const Tensor*>& in) {
  Tensor out;
  out.shape = n.shape;
  out.v.resize(n.shape.NumElements());
  for (const Tensor* t : in) out.converts |= t->converts;
  switch (n.op.code) {
    case OpCode::kConstant:
      for (mpq_class& x : out.v) x = n.op.value;
      return out;
    case OpCode::kElemOp: {
      std::vector<mpq_class> args(in.size());
      for (int64_t k = 0; k < n.shape.NumElements(); ++k) {
        for (size_t i = 0; i < in.size(); ++i) {
          args[i] = in[i]->shape.rank() == 0 ? in[i]->v[0] : in[i]->v[k];
        }
        absl::StatusOr<mpq_class> r = ApplyElem(n.op.name, args);
        if (!r.ok()) return r.status();
        out.v[k] = *std::move(r);
      }
      return out;
    }
    case OpCode::kDot: {
      const Tensor& x = *in[0];
      const Tensor& y = *in[1];
      const int64_t r = x.shape.rank();
      const int64_t m = x.shape[r - 2], kk = x.shape[r - 1];
      const int64_t nn = y.shape[y.shape.rank() - 1];
      const int64_t batch = x.shape.PrefixProduct(r - 2);
      const bool batched_y = y.shape.rank() == r && r > 2;
      for (int64_t b = 0; b < batch; ++b) {
        const int64_t yb = batched_y ? b * kk * nn : 0;
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t j = 0; j < nn; ++j) {
            mpq_class acc = 0;
            for (int64_t c = 0; c < kk; ++c) {
              acc += x.v[(b * m + i) * kk + c] * y.v[yb + c * nn + j];
            }
            out.v[(b * m + i) * nn + j] = acc;
          }
        }
      }
      return out;
    }
    case OpCode::kTranspose: {
      const Tensor& x = *in[0];
      std::vector<int64_t> st = Strides(x.shape);
      for (int64_t k = 0; k < n.shape.NumElements(); ++k) {
        std::vector<int64_t> idx = Unravel(k, n.shape);
        int64_t src = 0;
        for (size_t i = 0; i < idx.size(); ++i) {
          src += idx[i] * st[n.op.perm[i]];
        }
        out.v[k] = x.v[src];
      }
      return out;
    }
    case OpCode::kReshape:
      out.v = in[0]->v;
      return out;
    case OpCode::kConvert:
      out.v = in[0]->v;
      out.converts |= 1u << static_cast<int>(n.op.dtype);
      return out;
    case OpCode::kSlice:
      return SliceOf(*in[0], n.op.dim, n.op.start, n.op.length);
    case OpCode::kMaxReduce:
    case OpCode::kSumReduce: {
      const Tensor& x = *in[0];
      const int64_t d = n.op.dim;
      std::vector<bool> set(out.v.size(), false);
      for (int64_t k = 0; k < x.shape.NumElements(); ++k) {
        std::vector<int64_t> idx = Unravel(k, x.shape);
        idx.erase(idx.begin() + d);
        const int64_t o = Ravel(idx, n.shape);
        if (!set[o]) {
          out.v[o] = x.v[k];
          set[o] = true;
        } else if (n.op.code == OpCode::kSumReduce) {
          out.v[o] += x.v[k];
        } else if (out.v[o] < x.v[k]) {
          out.v[o] = x.v[k];
        }
      }
      return out;
    }
    case OpCode::kConcat:
      return Concat(in, n.op.dim);
    default:
      return absl::UnimplementedError(
          absl::StrCat("no oracle semantics for ", n.op.ToString()));
  }
}

std::string Show(const mpq_class& q) { return q.get_str(); }

}  // namespace

absl::StatusOr<OracleResult> OracleExecute(const Graph& base, const Graph& dist,
                                           const AnnotationSet& ann,
                                           uint64_t seed,
                                           const InputValues& fixed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(-4, 4);

  // Baseline.
  absl::flat_hash_map<std::string, Tensor> bv;
  absl::StatusOr<std::vector<int64_t>> border = TopologicalOrder(base);
  if (!border.ok()) return border.status();
  for (int64_t i : *border) {
    const TensorNode& n = base.nodes()[i];
    if (n.op.code == OpCode::kInput) {
      Tensor t;
      t.shape = n.shape;
      t.v.resize(n.shape.NumElements());
      for (mpq_class& x : t.v) x = pick(rng);
      if (auto it = fixed.find(n.id); it != fixed.end()) {
        if (it->second.size() != t.v.size()) {
          return absl::InvalidArgumentError(
              absl::StrCat("input ", n.id, " needs ", t.v.size(), " values"));
        }
        for (size_t k = 0; k < t.v.size(); ++k) t.v[k] = it->second[k];
      }
      bv[n.id] = std::move(t);
      continue;
    }
    std::vector<const Tensor*> in;
    for (const std::string& x : n.inputs) in.push_back(&bv.at(x));
    absl::StatusOr<Tensor> t = Eval(n, in);
    if (!t.ok()) return t.status();
    bv[n.id] = *std::move(t);
  }

  // Distributed, one value slot per world rank.
  std::set<int64_t> rank_set;
  for (int64_t r : WorldOf(ann).ranks) rank_set.insert(r);
  for (const TensorNode& n : dist.nodes()) {
    if (n.rank.has_value()) rank_set.insert(*n.rank);
    for (int64_t r : n.op.group.ranks) rank_set.insert(r);
  }
  if (rank_set.empty()) rank_set.insert(0);
  const std::vector<int64_t> world(rank_set.begin(), rank_set.end());
  auto slot = [&](int64_t rank) {
    return static_cast<size_t>(
        std::lower_bound(world.begin(), world.end(), rank) - world.begin());
  };
  absl::flat_hash_map<std::string, const AnnotationEntry*> ann_of;
  for (const AnnotationEntry& e : ann.entries) {
    ann_of[e.distributed_ids[0]] = &e;
  }
  absl::flat_hash_map<std::string, std::vector<Value>> dv;
  absl::StatusOr<std::vector<int64_t>> dorder = TopologicalOrder(dist);
  if (!dorder.ok()) return dorder.status();
  for (int64_t i : *dorder) {
    const TensorNode& n = dist.nodes()[i];
    std::vector<Value>& out = dv[n.id];
    out.assign(world.size(), std::nullopt);
    if (n.op.code == OpCode::kInput) {
      auto it = ann_of.find(n.id);
      if (it == ann_of.end()) {
        return absl::InvalidArgumentError(
            absl::StrCat("distributed input ", n.id, " has no annotation"));
      }
      const AnnotationEntry& e = *it->second;
      const Tensor& src = bv.at(e.baseline_id);
      for (size_t p = 0; p < e.group.ranks.size(); ++p) {
        const size_t s = slot(e.group.ranks[p]);
        if (e.kind == RelationKindTag::kReplicate) {
          out[s] = src;
        } else {
          const int64_t local = src.shape[e.dim] / e.group.size();
          out[s] = SliceOf(src, e.dim, p * local, local);
        }
      }
      continue;
    }
    if (n.op.IsCollective()) {
      const ReplicaGroup& g = n.op.group;
      const bool per_rank =
          n.inputs.size() > 1 || dist.Get(n.inputs[0]).rank.has_value();
      // Operand p of the group.
      std::vector<const Tensor*> parts;
      bool defined = true;
      for (size_t p = 0; p < g.ranks.size(); ++p) {
        const std::vector<Value>& src =
            dv.at(per_rank ? n.inputs[p] : n.inputs[0]);
        const Value& v = src[slot(g.ranks[p])];
        if (!v.has_value()) {
          defined = false;
          break;
        }
        parts.push_back(&*v);
      }
      // Ranks outside the group keep their own operand under all-reduce.
      if (n.op.code == OpCode::kAllReduce && !per_rank) {
        const std::vector<Value>& src = dv.at(n.inputs[0]);
        for (size_t s = 0; s < world.size(); ++s) {
          if (g.PositionOf(world[s]) < 0) out[s] = src[s];
        }
      }
      if (!defined) continue;
      for (size_t p = 0; p < g.ranks.size(); ++p) {
        const size_t s = slot(g.ranks[p]);
        switch (n.op.code) {
          case OpCode::kAllReduce:
            out[s] = Combine(parts, n.op.combiner);
            break;
          case OpCode::kAllGather:
            out[s] = Concat(parts, n.op.dim);
            break;
          case OpCode::kReduceScatter: {
            Tensor full = Combine(parts, n.op.combiner);
            const int64_t local = n.shape[n.op.dim];
            out[s] = SliceOf(full, n.op.dim, p * local, local);
            break;
          }
          default:
            break;
        }
      }
      continue;
    }
    for (size_t s = 0; s < world.size(); ++s) {
      if (n.rank.has_value() && world[s] != *n.rank) continue;
      std::vector<const Tensor*> in;
      bool defined = true;
      for (const std::string& x : n.inputs) {
        const Value& v = dv.at(x)[s];
        if (!v.has_value()) {
          defined = false;
          break;
        }
        in.push_back(&*v);
      }
      if (!defined) continue;
      absl::StatusOr<Tensor> t = Eval(n, in);
      if (!t.ok()) return t.status();
      out[s] = *std::move(t);
    }
  }

  OracleResult result;
  for (const std::string& id : base.outputs()) {
    std::vector<std::string>& vals = result.baseline_outputs.emplace_back();
    for (const mpq_class& q : bv.at(id).v) vals.push_back(Show(q));
  }
  if (base.outputs().size() != dist.outputs().size()) {
    result.witness = "output counts differ";
    return result;
  }
  for (size_t k = 0; k < base.outputs().size(); ++k) {
    const TensorNode& bn = base.Get(base.outputs()[k]);
    const TensorNode& dn = dist.Get(dist.outputs()[k]);
    const Tensor& want = bv.at(bn.id);
    if (bn.dtype != dn.dtype) {
      result.witness =
          absl::StrCat("output ", k, ": dtype ", DTypeName(bn.dtype), " vs ",
                       DTypeName(dn.dtype));
      return result;
    }
    const std::vector<Value>& got = dv.at(dn.id);
    for (size_t s = 0; s < world.size(); ++s) {
      const std::string where = absl::StrCat("output ", k, " rank ", world[s]);
      if (!got[s].has_value()) {
        result.witness = absl::StrCat(where, ": undefined");
        return result;
      }
      if (got[s]->shape != want.shape) {
        result.witness = absl::StrCat(where, ": shape ", want.shape.ToString(),
                                      " vs ", got[s]->shape.ToString());
        return result;
      }
      if (got[s]->converts != want.converts) {
        result.witness = absl::StrCat(where, ": precision history differs");
        return result;
      }
      for (size_t i = 0; i < want.v.size(); ++i) {
        if (got[s]->v[i] != want.v[i]) {
          result.witness =
              absl::StrCat(where, " index ", i, ": baseline ", Show(want.v[i]),
                           " vs distributed ", Show(got[s]->v[i]));
          return result;
        }
      }
    }
  }
  result.equal = true;
  return result;
}

}  // namespace graphcheck
