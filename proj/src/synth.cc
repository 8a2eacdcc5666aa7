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

#include "graphcheck/synth.h"

#include <functional>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "graphcheck/builder.h"
#include "graphcheck/oracle.h"

namespace graphcheck {
namespace {

std::string Id(int64_t layer, absl::string_view name) {
  return absl::StrCat("l", layer, ".", name);
}

// Emits one model on one side. The distributed variant is selected by
// `plan`; a null plan gives the baseline.
class Emitter {
 public:
  Emitter(const ModelSpec& spec, const ParallelPlan* plan)
      : spec_(spec),
        plan_(plan),
        b_(plan == nullptr ? GraphKind::kBaseline : GraphKind::kDistributed) {
    c_ = plan == nullptr ? 1 : plan->degree;
    std::string file = absl::StrCat(
        ModelKindName(spec.kind), "_",
        plan == nullptr ? "base" : StrategyName(plan->strategy), ".py");
    b_.set_file(file);
  }

  ModelPair* pair = nullptr;  // receives annotations when distributed

  Graph Run() {
    const int64_t t = spec_.tokens(), h = spec_.hidden;
    std::string x = Input("x", Shape{t, h}, Sp() ? 0 : -1);
    for (int64_t l = 0; l < spec_.layers; ++l) {
      b_.set_layer(l);
      switch (spec_.kind) {
        case ModelKind::kMlp:
          x = Mlp(l, x);
          break;
        case ModelKind::kAttention:
          x = Attention(l, x);
          break;
        case ModelKind::kMoe:
          x = Moe(l, x);
          break;
      }
    }
    if (Sp()) {
      x = b_.Add("out", OpKind::AllGather(0, Group()), {x});
    }
    b_.AddOutput(x);
    b_.set_layer(std::nullopt);
    return std::move(b_).Build();
  }

 private:
  bool Dist() const { return plan_ != nullptr; }
  bool Tp() const { return Dist() && plan_->strategy == Strategy::kTp; }
  bool Sp() const { return Dist() && plan_->strategy == Strategy::kSp; }
  bool Ep() const { return Dist() && plan_->strategy == Strategy::kEp; }
  // Weights are sharded Megatron-style under tp and sp.
  bool Sharded() const { return Tp() || Sp(); }
  ReplicaGroup Group() const { return plan_->group(); }

  // Declares an input. shard_dim < 0 means replicated; `full` is the
  // baseline shape, divided along shard_dim on the distributed side.
  std::string Input(const std::string& id, Shape full, int64_t shard_dim) {
    if (!Dist()) return b_.Input(id, std::move(full));
    Shape local = full;
    AnnotationEntry e;
    e.baseline_id = id;
    e.distributed_ids = {id};
    e.group = Group();
    if (shard_dim >= 0) {
      local.dims[shard_dim] /= c_;
      e.kind = RelationKindTag::kShard;
      e.dim = shard_dim;
    }
    pair->ann.entries.push_back(std::move(e));
    return b_.Input(id, std::move(local));
  }

  std::string Weight(int64_t l, absl::string_view name, Shape full,
                     int64_t shard_dim) {
    return Input(Id(l, name), std::move(full), Sharded() ? shard_dim : -1);
  }

  // Gathers the token-sharded activation under sp.
  std::string Enter(int64_t l, const std::string& x) {
    if (!Sp()) return x;
    return b_.Add(Id(l, "ag"), OpKind::AllGather(0, Group()), {x});
  }

  // Reduces the per-rank partial sums of a row-sharded projection.
  std::string Exit(int64_t l, const std::string& partial, int64_t token_dim) {
    if (Tp()) {
      return b_.Add(Id(l, "ar"), OpKind::AllReduce(Group(), Combiner::kAdd),
                    {partial});
    }
    if (Sp()) {
      return b_.Add(Id(l, "rs"),
                    OpKind::ReduceScatter(token_dim, Group(), Combiner::kAdd),
                    {partial});
    }
    return partial;
  }

  std::string Mlp(int64_t l, const std::string& x) {
    const int64_t t = spec_.tokens(), h = spec_.hidden, f = spec_.ffn();
    std::string w1 = Weight(l, "w1", Shape{h, f}, 1);
    std::string b1 = Weight(l, "b1", Shape{t, f}, 1);
    std::string w2 = Weight(l, "w2", Shape{f, h}, 0);
    std::string g = Enter(l, x);
    std::string h1 = b_.Dot(Id(l, "h1"), g, w1);
    std::string a1 = b_.Elem(Id(l, "a1"), "add", {h1, b1});
    std::string r = b_.Elem(Id(l, "relu"), "relu", {a1});
    std::string h2 = b_.Dot(Id(l, "h2"), r, w2);
    std::string o = Exit(l, h2, 0);
    return b_.Elem(Id(l, "y"), "add", {o, x});
  }

  std::string Attention(int64_t l, const std::string& x) {
    const int64_t t = spec_.tokens(), h = spec_.hidden;
    const int64_t dh = h / spec_.heads;
    const int64_t nh = Sharded() ? spec_.heads / c_ : spec_.heads;
    const int64_t hl = nh * dh;
    std::string wq = Weight(l, "wq", Shape{h, h}, 1);
    std::string wk = Weight(l, "wk", Shape{h, h}, 1);
    std::string wv = Weight(l, "wv", Shape{h, h}, 1);
    std::string wo = Weight(l, "wo", Shape{h, h}, 0);
    std::string g = Enter(l, x);
    std::string q = b_.Dot(Id(l, "q"), g, wq);
    std::string k = b_.Dot(Id(l, "k"), g, wk);
    std::string v = b_.Dot(Id(l, "v"), g, wv);
    std::string q3 = b_.Reshape(Id(l, "q3"), q, Shape{t, nh, dh});
    std::string qh = b_.Transpose(Id(l, "qh"), q3, {1, 0, 2});
    std::string k3 = b_.Reshape(Id(l, "k3"), k, Shape{t, nh, dh});
    std::string kh = b_.Transpose(Id(l, "kh"), k3, {1, 2, 0});
    std::string v3 = b_.Reshape(Id(l, "v3"), v, Shape{t, nh, dh});
    std::string vh = b_.Transpose(Id(l, "vh"), v3, {1, 0, 2});
    std::string sc = b_.Dot(Id(l, "scores"), qh, kh);
    // Softmax surrogate: exp replaced by x^2 + 1 after max subtraction.
    std::string ones = b_.Constant(Id(l, "ones"), 1, Shape{1, t});
    std::string mx = b_.Add(Id(l, "max"), OpKind::MaxReduce(2), {sc});
    std::string mx3 = b_.Reshape(Id(l, "max3"), mx, Shape{nh, t, 1});
    std::string mb = b_.Dot(Id(l, "maxb"), mx3, ones);
    std::string df = b_.Elem(Id(l, "shift"), "sub", {sc, mb});
    std::string ex = b_.Elem(Id(l, "pexp"), "sq1", {df});
    std::string sm = b_.Add(Id(l, "sum"), OpKind::SumReduce(2), {ex});
    std::string sm3 = b_.Reshape(Id(l, "sum3"), sm, Shape{nh, t, 1});
    std::string sb = b_.Dot(Id(l, "sumb"), sm3, ones);
    std::string p = b_.Elem(Id(l, "probs"), "div", {ex, sb});
    std::string ctx = b_.Dot(Id(l, "ctx"), p, vh);
    std::string ct = b_.Transpose(Id(l, "ctxt"), ctx, {1, 0, 2});
    std::string mg = b_.Reshape(Id(l, "merge"), ct, Shape{t, hl});
    std::string o = b_.Dot(Id(l, "o"), mg, wo);
    std::string y = Exit(l, o, 0);
    return b_.Elem(Id(l, "y"), "add", {y, x});
  }

  std::string Moe(int64_t l, const std::string& x) {
    const int64_t t = spec_.tokens(), h = spec_.hidden, f = spec_.ffn();
    const int64_t e = spec_.experts;
    const int64_t le = Ep() ? e / c_ : e;
    Shape w1s{e, h, f}, w2s{e, f, h};
    std::string w1, w2;
    if (Ep()) {
      w1 = Input(Id(l, "w1"), w1s, 0);
      w2 = Input(Id(l, "w2"), w2s, 0);
    } else {
      w1 = Weight(l, "w1", w1s, 2);
      w2 = Weight(l, "w2", w2s, 1);
    }
    std::string g = Enter(l, x);
    std::string xr = b_.Reshape(Id(l, "xr"), g, Shape{1, t, h});
    std::vector<std::string> copies(le, xr);
    std::string xe = b_.Add(Id(l, "xe"), OpKind::Concat(0), copies);
    std::string h1 = b_.Dot(Id(l, "h1"), xe, w1);
    std::string r = b_.Elem(Id(l, "relu"), "relu", {h1});
    std::string h2 = b_.Dot(Id(l, "h2"), r, w2);
    std::string acc;
    if (Ep()) {
      // Per-rank loops over the local experts, then one all-reduce.
      std::vector<std::string> partials;
      for (int64_t rank : Group().ranks) {
        b_.set_rank(rank);
        std::string racc;
        for (int64_t k = 0; k < le; ++k) {
          std::string s = b_.Add(Id(l, absl::StrCat("r", rank, ".e", k)),
                                 OpKind::Slice(0, k, 1), {h2});
          racc = k == 0 ? s
                        : b_.Elem(Id(l, absl::StrCat("r", rank, ".acc", k)),
                                  "add", {racc, s});
        }
        partials.push_back(racc);
        b_.set_rank(std::nullopt);
      }
      acc = b_.Add(Id(l, "ar"), OpKind::AllReduce(Group(), Combiner::kAdd),
                   partials);
    } else {
      std::string src = Exit(l, h2, 1);
      for (int64_t i = 0; i < e; ++i) {
        std::string s =
            b_.Add(Id(l, absl::StrCat("e", i)), OpKind::Slice(0, i, 1), {src});
        acc = i == 0 ? s
                     : b_.Elem(Id(l, absl::StrCat("acc", i)), "add", {acc, s});
      }
    }
    const int64_t rows = Sp() ? t / c_ : t;
    std::string rr = b_.Reshape(Id(l, "comb"), acc, Shape{rows, h});
    return b_.Elem(Id(l, "y"), "add", {rr, x});
  }

  const ModelSpec& spec_;
  const ParallelPlan* plan_;
  GraphBuilder b_;
  int64_t c_ = 1;
};

}  // namespace

absl::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMlp:
      return "mlp";
    case ModelKind::kAttention:
      return "attention";
    case ModelKind::kMoe:
      return "moe";
  }
  return "?";
}

absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name) {
  for (ModelKind k :
       {ModelKind::kMlp, ModelKind::kAttention, ModelKind::kMoe}) {
    if (ModelKindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown model kind ", name));
}

std::string ModelSpec::ToString() const {
  return absl::StrFormat("%s(L=%d,h=%d,heads=%d,s=%d,b=%d,e=%d)",
                         ModelKindName(kind), layers, hidden, heads, seqlen,
                         batch, experts);
}

absl::Status ValidateModelSpec(const ModelSpec& spec) {
  if (spec.layers < 1 || spec.hidden < 1 || spec.heads < 1 || spec.seqlen < 1 ||
      spec.batch < 1 || spec.experts < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("model sizes must be positive: ", spec.ToString()));
  }
  if (spec.hidden % spec.heads != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("hidden not divisible by heads: ", spec.ToString()));
  }
  if (spec.kind == ModelKind::kMoe && spec.experts > 64) {
    return absl::InvalidArgumentError("at most 64 experts");
  }
  return absl::OkStatus();
}

absl::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kTp:
      return "tp";
    case Strategy::kSp:
      return "sp";
    case Strategy::kEp:
      return "ep";
  }
  return "?";
}

absl::StatusOr<Strategy> ParseStrategy(absl::string_view name) {
  for (Strategy s : {Strategy::kTp, Strategy::kSp, Strategy::kEp}) {
    if (StrategyName(s) == name) return s;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown strategy ", name));
}

ReplicaGroup ParallelPlan::group() const {
  ReplicaGroup g;
  for (int64_t r = 0; r < degree; ++r) g.ranks.push_back(r);
  return g;
}

std::string ParallelPlan::ToString() const {
  return absl::StrCat(StrategyName(strategy), "(", degree, ")");
}

absl::StatusOr<Graph> BuildBaseline(const ModelSpec& spec) {
  if (absl::Status s = ValidateModelSpec(spec); !s.ok()) return s;
  return Emitter(spec, nullptr).Run();
}

absl::StatusOr<ModelPair> Parallelize(const ModelSpec& spec,
                                      const ParallelPlan& plan) {
  if (absl::Status s = ValidateModelSpec(spec); !s.ok()) return s;
  if (plan.degree < 1) {
    return absl::InvalidArgumentError("degree must be positive");
  }
  auto indivisible = [&](absl::string_view what, int64_t extent) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "IndivisibleDim: %s extent %d by %s", what, extent, plan.ToString()));
  };
  const int64_t c = plan.degree;
  const bool megatron =
      plan.strategy == Strategy::kTp || plan.strategy == Strategy::kSp;
  if (megatron) {
    if (spec.kind == ModelKind::kAttention && spec.heads % c != 0) {
      return indivisible("heads", spec.heads);
    }
    if (spec.kind != ModelKind::kAttention && spec.ffn() % c != 0) {
      return indivisible("ffn", spec.ffn());
    }
  }
  if (plan.strategy == Strategy::kSp && spec.tokens() % c != 0) {
    return indivisible("tokens", spec.tokens());
  }
  if (plan.strategy == Strategy::kEp && spec.kind == ModelKind::kMoe &&
      spec.experts % c != 0) {
    return indivisible("experts", spec.experts);
  }
  ModelPair pair;
  pair.base = Emitter(spec, nullptr).Run();
  Emitter dist(spec, &plan);
  dist.pair = &pair;
  pair.dist = dist.Run();
  return pair;
}

absl::Status Reinfer(Graph& g) {
  absl::StatusOr<std::vector<int64_t>> order = TopologicalOrder(g);
  if (!order.ok()) return order.status();
  for (int64_t i : *order) {
    const TensorNode& n = g.nodes()[i];
    if (n.op.code == OpCode::kInput || n.op.code == OpCode::kConstant) {
      continue;
    }
    std::vector<Shape> shapes;
    DType dtype = DType::kExact;
    for (const std::string& in : n.inputs) {
      const TensorNode& x = g.Get(in);
      shapes.push_back(x.shape);
      dtype = PromoteDType(dtype, x.dtype);
    }
    absl::StatusOr<Shape> shape = InferShape(n.op, shapes);
    if (!shape.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(n.id, ": ", shape.status().message()));
    }
    TensorNode* m = g.FindMutable(n.id);
    m->shape = *std::move(shape);
    m->dtype = n.op.code == OpCode::kConvert ? n.op.dtype : dtype;
    if (m->loc.has_value()) m->loc->expr = m->op.ToString();
  }
  return absl::OkStatus();
}

namespace {

absl::Status Inapplicable(const BugInjection& bug, absl::string_view why) {
  return absl::FailedPreconditionError(
      absl::StrCat("InapplicableSite: category ", bug.category, " ",
                   bug.mutation, " at ", bug.site, ": ", why));
}

// Points every consumer of `from` (and graph outputs) at `to`, except the
// node `keep`.
void Rewire(Graph& g, const std::string& from, const std::string& to,
            const std::string& keep) {
  for (const TensorNode& n : g.nodes()) {
    if (n.id == keep) continue;
    TensorNode* m = g.FindMutable(n.id);
    for (std::string& in : m->inputs) {
      if (in == from) in = to;
    }
  }
  std::vector<std::string> outs = g.outputs();
  for (std::string& o : outs) {
    if (o == from) o = to;
  }
  g.set_outputs(std::move(outs));
}

// Consumers of `id` in graph order.
std::vector<std::string> ConsumersOf(const Graph& g, const std::string& id) {
  std::vector<std::string> out;
  for (const TensorNode& n : g.nodes()) {
    for (const std::string& in : n.inputs) {
      if (in == id) {
        out.push_back(n.id);
        break;
      }
    }
  }
  return out;
}

bool EndsWith(absl::string_view s, absl::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<BugInjection> InjectionSites(const ModelPair& pair, int category) {
  std::vector<BugInjection> out;
  const Graph& g = pair.dist;
  for (const TensorNode& n : g.nodes()) {
    const bool spmd_operand =
        n.inputs.size() == 1 && !g.Get(n.inputs[0]).rank.has_value();
    auto add = [&](std::string mutation, std::string expected) {
      out.push_back(BugInjection{category, n.id, std::move(mutation),
                                 std::move(expected)});
    };
    switch (category) {
      case 1:
        if (n.op.code == OpCode::kAllReduce) {
          if (spmd_operand) add("delete", n.inputs[0]);
          add("duplicate", n.id + ".dup");
          add("swap", n.id);
        } else if (n.op.code == OpCode::kReduceScatter) {
          add("swap", n.id);
        }
        break;
      case 2:
        if (n.op.group.size() < 2 || !spmd_operand) break;
        if (n.op.code == OpCode::kAllReduce) add("shrink", n.id);
        if (n.op.code == OpCode::kAllGather ||
            n.op.code == OpCode::kReduceScatter) {
          add("rotate", n.id);
        }
        break;
      case 3:
        if ((n.op.code == OpCode::kDot || n.op.code == OpCode::kElemOp) &&
            !n.rank.has_value()) {
          add("convert", n.id + ".cvt");
        }
        break;
      case 4:
        if (n.op.code == OpCode::kReshape &&
            (EndsWith(n.id, ".q3") || EndsWith(n.id, ".k3") ||
             EndsWith(n.id, ".v3"))) {
          add("split", n.id);
        }
        break;
      case 5:
        if (n.op.code == OpCode::kReshape && EndsWith(n.id, ".merge")) {
          add("bsh", n.id);
        }
        break;
      default:
        break;
    }
  }
  return out;
}

absl::StatusOr<ModelPair> Inject(const ModelPair& pair,
                                 const BugInjection& bug) {
  ModelPair out = pair;
  Graph& g = out.dist;
  TensorNode* site = g.FindMutable(bug.site);
  if (site == nullptr) return Inapplicable(bug, "no such node");
  const TensorNode orig = *site;
  auto insert_after = [&](TensorNode n) -> absl::Status {
    n.layer = orig.layer;
    n.loc = orig.loc;
    const std::string id = n.id;
    if (absl::Status s = g.AddNode(std::move(n)); !s.ok()) return s;
    Rewire(g, orig.id, id, id);
    return absl::OkStatus();
  };
  if (bug.category == 1) {
    if (!orig.op.IsCollective()) return Inapplicable(bug, "not a collective");
    if (bug.mutation == "delete") {
      if (orig.op.code != OpCode::kAllReduce || orig.inputs.size() != 1) {
        return Inapplicable(bug, "only single-operand all-reduce");
      }
      Rewire(g, orig.id, orig.inputs[0], orig.id);
      g.RemoveNode(orig.id);
    } else if (bug.mutation == "duplicate") {
      if (orig.op.code != OpCode::kAllReduce) {
        return Inapplicable(bug, "only all-reduce");
      }
      TensorNode n;
      n.id = orig.id + ".dup";
      n.op = OpKind::AllReduce(orig.op.group, orig.op.combiner);
      n.inputs = {orig.id};
      n.shape = orig.shape;
      n.dtype = orig.dtype;
      if (absl::Status s = insert_after(std::move(n)); !s.ok()) return s;
    } else if (bug.mutation == "swap") {
      if (orig.op.combiner != Combiner::kAdd) {
        return Inapplicable(bug, "combiner is not add");
      }
      site->op.combiner = Combiner::kMax;
    } else {
      return Inapplicable(bug, "unknown mutation");
    }
  } else if (bug.category == 2) {
    if (!orig.op.IsCollective() || orig.op.group.size() < 2) {
      return Inapplicable(bug, "needs a collective over at least 2 ranks");
    }
    if (bug.mutation == "shrink" && orig.op.code == OpCode::kAllReduce) {
      site->op.group.ranks.resize(orig.op.group.size() / 2);
    } else if (bug.mutation == "rotate") {
      std::vector<int64_t>& r = site->op.group.ranks;
      std::rotate(r.begin(), r.begin() + 1, r.end());
    } else {
      return Inapplicable(bug, "unknown mutation");
    }
  } else if (bug.category == 3) {
    if (orig.op.IsCollective() || orig.op.code == OpCode::kInput) {
      return Inapplicable(bug, "needs a compute node");
    }
    TensorNode n;
    n.id = orig.id + ".cvt";
    n.op = OpKind::Convert(orig.dtype == DType::kBF16 ? DType::kF16
                                                      : DType::kBF16);
    n.inputs = {orig.id};
    n.shape = orig.shape;
    n.dtype = n.op.dtype;
    n.rank = orig.rank;
    if (absl::Status s = insert_after(std::move(n)); !s.ok()) return s;
  } else if (bug.category == 4) {
    // (t, nh, dh) becomes (t, dh, nh), with the head transpose fixed up so
    // that every shape is unchanged.
    if (orig.op.code != OpCode::kReshape || orig.shape.rank() != 3) {
      return Inapplicable(bug, "needs a rank-3 head-split reshape");
    }
    std::vector<std::string> users = ConsumersOf(g, orig.id);
    if (users.size() != 1 || g.Get(users[0]).op.code != OpCode::kTranspose) {
      return Inapplicable(bug, "head split not followed by one transpose");
    }
    TensorNode* tr = g.FindMutable(users[0]);
    std::vector<int64_t> perm = tr->op.perm;
    // Dim 1 and 2 of the reshape output trade places.
    for (int64_t& p : perm) {
      if (p == 1) {
        p = 2;
      } else if (p == 2) {
        p = 1;
      }
    }
    site->op.target = Shape{orig.shape[0], orig.shape[2], orig.shape[1]};
    tr->op.perm = perm;
  } else if (bug.category == 5) {
    // Drops the transpose in front of the head-merge reshape.
    if (orig.op.code != OpCode::kReshape || orig.inputs.size() != 1) {
      return Inapplicable(bug, "needs a reshape");
    }
    const TensorNode& tr = g.Get(orig.inputs[0]);
    if (tr.op.code != OpCode::kTranspose) {
      return Inapplicable(bug, "reshape not fed by a transpose");
    }
    site->inputs = {tr.inputs[0]};
    if (ConsumersOf(g, tr.id).empty()) g.RemoveNode(tr.id);
  } else {
    return Inapplicable(bug, "unknown category");
  }
  if (absl::Status s = Reinfer(g); !s.ok()) return s;
  std::vector<ValidationError> errs = ValidateGraph(g);
  if (!errs.empty()) return Inapplicable(bug, errs[0].ToString());
  return out;
}

namespace {

ModelSpec MatrixSpec(ModelKind kind) {
  ModelSpec spec;
  spec.kind = kind;
  spec.layers = 2;
  if (kind == ModelKind::kAttention) {
    spec.hidden = 16;
    spec.heads = 8;
  }
  return spec;
}

std::string CaseName(const ModelSpec& spec, const ParallelPlan& plan) {
  return absl::StrCat(ModelKindName(spec.kind), "-",
                      StrategyName(plan.strategy), plan.degree);
}

}  // namespace

absl::StatusOr<std::vector<CorpusCase>> BuildCorrectCorpus() {
  std::vector<CorpusCase> out;
  const std::vector<ParallelPlan> plans = {
      {Strategy::kTp, 2}, {Strategy::kTp, 4}, {Strategy::kTp, 8},
      {Strategy::kSp, 4}, {Strategy::kEp, 2}, {Strategy::kEp, 4}};
  for (ModelKind kind :
       {ModelKind::kMlp, ModelKind::kAttention, ModelKind::kMoe}) {
    for (const ParallelPlan& plan : plans) {
      CorpusCase c;
      c.spec = MatrixSpec(kind);
      c.plan = plan;
      c.name = CaseName(c.spec, plan);
      absl::StatusOr<ModelPair> pair = Parallelize(c.spec, plan);
      if (!pair.ok()) return pair.status();
      c.pair = *std::move(pair);
      out.push_back(std::move(c));
    }
  }
  return out;
}

absl::StatusOr<std::vector<CorpusCase>> BuildBugCorpus(int per_category,
                                                       int seeds) {
  std::vector<CorpusCase> out;
  const std::vector<std::pair<ModelKind, ParallelPlan>> configs = {
      {ModelKind::kMlp, {Strategy::kTp, 2}},
      {ModelKind::kMlp, {Strategy::kSp, 4}},
      {ModelKind::kAttention, {Strategy::kTp, 2}},
      {ModelKind::kAttention, {Strategy::kSp, 4}},
      {ModelKind::kMoe, {Strategy::kTp, 4}},
      {ModelKind::kMoe, {Strategy::kSp, 4}},
      {ModelKind::kMoe, {Strategy::kEp, 2}},
  };
  for (const auto& [kind, plan] : configs) {
    const ModelSpec spec = MatrixSpec(kind);
    absl::StatusOr<ModelPair> pair = Parallelize(spec, plan);
    if (!pair.ok()) return pair.status();
    for (int category = 1; category <= 5; ++category) {
      int taken = 0;
      for (const BugInjection& bug : InjectionSites(*pair, category)) {
        if (taken == per_category) break;
        absl::StatusOr<ModelPair> mutated = Inject(*pair, bug);
        if (!mutated.ok()) continue;
        bool manifests = false;
        for (int seed = 0; seed < seeds && !manifests; ++seed) {
          absl::StatusOr<OracleResult> r =
              OracleExecute(mutated->base, mutated->dist, mutated->ann, seed);
          if (!r.ok()) return r.status();
          manifests = !r->equal;
        }
        if (!manifests) continue;
        CorpusCase c;
        c.spec = spec;
        c.plan = plan;
        c.bug = bug;
        c.name = absl::StrCat(CaseName(spec, plan), "-c", category, "-",
                              bug.mutation, "-", bug.site);
        c.pair = *std::move(mutated);
        out.push_back(std::move(c));
        ++taken;
      }
    }
  }
  return out;
}

}  // namespace graphcheck
