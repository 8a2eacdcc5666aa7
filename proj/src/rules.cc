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

#include "graphcheck/rules.h"

#include <algorithm>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "graphcheck/bijection.h"
#include "graphcheck/layout.h"

namespace graphcheck {
namespace {

constexpr int kMaxChainDepth = 8;

// Shorthands over the environment.
const ENode& Node(const RuleEnv& env, ENodeId n) { return env.eg().node(n); }
ClassId ClassOf(const RuleEnv& env, ENodeId n) { return env.eg().ClassOf(n); }
ClassId Canon(const RuleEnv& env, ClassId c) { return env.eg().Find(c); }
const Shape& ShapeOf(const RuleEnv& env, ClassId c) {
  return env.eg().ShapeOf(c);
}

bool IsBase(const ENode& n) { return n.HasSide(GraphKind::kBaseline); }
bool IsSpmd(const ENode& n) {
  return n.HasSide(GraphKind::kDistributed) && !n.rank.has_value();
}

bool IsScalar(const RuleEnv& env, ClassId c) {
  return ShapeOf(env, c).rank() == 0;
}

// Distributed counterparts of baseline node zb: distributed users, with the
// same opcode, of zb's child `via` or of any class a fact relates it to.
// When `same_op` is set the full op including attributes must match.
std::vector<ENodeId> Counterparts(const RuleEnv& env, ENodeId zb, size_t via,
                                  bool same_op, bool spmd = true) {
  const ENode& z = Node(env, zb);
  std::vector<ENodeId> out;
  if (via >= z.children.size()) return out;
  ClassId x = Canon(env, z.children[via]);
  std::vector<ClassId> partners = {x};
  for (int64_t pos : env.db().About(x)) {
    const Fact& f = env.db().facts()[pos].fact;
    if (f.t == x && f.tp >= 0) partners.push_back(f.tp);
  }
  std::sort(partners.begin(), partners.end());
  partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
  for (ClassId p : partners) {
    for (ENodeId u : env.eg().Users(p)) {
      if (u == zb) continue;
      const ENode& n = Node(env, u);
      if (!n.HasSide(GraphKind::kDistributed)) continue;
      if (spmd && n.rank.has_value()) continue;
      if (!spmd && !n.rank.has_value()) continue;
      if (n.op.code != z.op.code) continue;
      if (same_op && !(n.op == z.op)) continue;
      if (same_op && n.children.size() != z.children.size()) continue;
      if (Canon(env, ClassOf(env, u)) == Canon(env, ClassOf(env, zb))) {
        continue;
      }
      out.push_back(u);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<const Fact*> Between(const RuleEnv& env, FactKind kind, ClassId t,
                                 ClassId tp) {
  std::vector<const Fact*> out;
  tp = Canon(env, tp);
  for (const Fact* f : env.FactsOnT(kind, t)) {
    if (f->tp == tp) out.push_back(f);
  }
  return out;
}

bool Contains(const ReplicaGroup& g, int64_t rank) {
  return g.PositionOf(rank) >= 0;
}

// A duplicate relation compatible with group g: same class, or a stored
// duplicate over g.
bool DupOver(const RuleEnv& env, ClassId t, ClassId tp, const ReplicaGroup& g) {
  std::optional<ReplicaGroup> d = env.DupGroup(t, tp);
  return d.has_value() && (*d == g || *d == env.world());
}

LayoutPrim PrimOf(const OpKind& op) {
  return op.code == OpCode::kTranspose ? LayoutPrim::Transpose(op.perm)
                                       : LayoutPrim::Reshape(op.target);
}

bool OnSide(const ENode& n, GraphKind side) {
  return side == GraphKind::kBaseline ? IsBase(n) : IsSpmd(n);
}

struct Chain {
  ClassId end;
  LayoutTerm seq;  // from the chain start to `end`
};

// Layout-op chains ending at c on one side: pairs (x, seq) with c = seq(x).
// Includes (c, []).
std::vector<Chain> BackChains(const RuleEnv& env, ClassId c, GraphKind side) {
  std::vector<Chain> out = {Chain{Canon(env, c), LayoutTerm()}};
  for (size_t i = 0; i < out.size() && out.size() < 64; ++i) {
    if (static_cast<int>(out[i].seq.prims().size()) >= kMaxChainDepth) continue;
    for (ENodeId m : env.eg().Members(out[i].end)) {
      const ENode& n = Node(env, m);
      if (!n.op.IsLayout() || !OnSide(n, side)) continue;
      std::vector<LayoutPrim> prims = {PrimOf(n.op)};
      for (const LayoutPrim& p : out[i].seq.prims()) prims.push_back(p);
      out.push_back(Chain{Canon(env, n.children[0]), LayoutTerm(prims)});
    }
  }
  return out;
}

// Maximal layout-op chains starting at c on one side: pairs (q, seq) with
// q = seq(c) and no further layout op on that side consuming q.
std::vector<Chain> ForwardEnds(const RuleEnv& env, ClassId c, GraphKind side) {
  std::vector<Chain> frontier = {Chain{Canon(env, c), LayoutTerm()}};
  std::vector<Chain> ends;
  while (!frontier.empty() && ends.size() < 64) {
    Chain cur = frontier.back();
    frontier.pop_back();
    bool extended = false;
    if (static_cast<int>(cur.seq.prims().size()) < kMaxChainDepth) {
      for (ENodeId u : env.eg().Users(cur.end)) {
        const ENode& n = Node(env, u);
        if (!n.op.IsLayout() || !OnSide(n, side)) continue;
        std::vector<LayoutPrim> prims = cur.seq.prims();
        prims.push_back(PrimOf(n.op));
        frontier.push_back(Chain{ClassOf(env, u), LayoutTerm(prims)});
        extended = true;
      }
    }
    if (!extended) ends.push_back(cur);
  }
  return ends;
}

LayoutTerm Canonical(const LayoutTerm& l, const Shape& in) {
  return CanonicalLayout(l, in);
}

// ---------------------------------------------------------------------------
// Partition rules.

// Elementwise ops (and converts) keep a common sharding of all operands;
// rank-0 operands must be replicated.
void ElemSharded(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z)) return;
  if (z.op.code != OpCode::kElemOp && z.op.code != OpCode::kConvert) return;
  size_t lead = 0;
  while (lead < z.children.size() && IsScalar(env, z.children[lead])) ++lead;
  if (lead == z.children.size()) return;
  for (ENodeId zd : Counterparts(env, zb, lead, /*same_op=*/true)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kSharded, z.children[lead], d.children[lead])) {
      bool ok = true;
      for (size_t i = 0; i < z.children.size() && ok; ++i) {
        if (i == lead) continue;
        if (IsScalar(env, z.children[i])) {
          ok = DupOver(env, z.children[i], d.children[i], f->group);
          continue;
        }
        bool found = false;
        for (const Fact* g :
             Between(env, FactKind::kSharded, z.children[i], d.children[i])) {
          if (g->dim == f->dim && g->group == f->group) found = true;
        }
        ok = found;
      }
      if (ok) {
        out.push_back(Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd), f->dim,
                                    f->group));
      }
    }
  }
}

// Replication over a group other than the world is carried through any
// non-collective op whose operands are all replicated over it. (World
// replication is handled by merging classes.)
void DupCongruence(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.children.empty() || z.op.IsCollective()) return;
  for (ENodeId zd : Counterparts(env, zb, 0, /*same_op=*/true)) {
    const ENode& d = Node(env, zd);
    std::optional<ReplicaGroup> group;
    bool ok = true;
    for (size_t i = 0; i < z.children.size() && ok; ++i) {
      std::optional<ReplicaGroup> g =
          env.DupGroup(z.children[i], d.children[i]);
      if (!g.has_value()) {
        ok = false;
      } else if (*g != env.world()) {
        if (group.has_value() && *group != *g) ok = false;
        group = g;
      }
    }
    if (ok && group.has_value()) {
      out.push_back(
          Fact::Duplicate(ClassOf(env, zb), ClassOf(env, zd), *group));
    }
  }
}

// Dot partition cases: contracted dims sharded on both sides give a partial
// sum; a sharded free or batch dim with a replicated other operand stays
// sharded.
void DotPartition(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out,
                  bool partial) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kDot) return;
  const int64_t rx = ShapeOf(env, z.children[0]).rank();
  const int64_t ry = ShapeOf(env, z.children[1]).rank();
  const int64_t rz = ShapeOf(env, ClassOf(env, zb)).rank();
  std::vector<ENodeId> cands = Counterparts(env, zb, 0, true);
  std::vector<ENodeId> more = Counterparts(env, zb, 1, true);
  cands.insert(cands.end(), more.begin(), more.end());
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  for (ENodeId zd : cands) {
    const ENode& d = Node(env, zd);
    const ClassId x = z.children[0], y = z.children[1];
    const ClassId xp = d.children[0], yp = d.children[1];
    std::vector<const Fact*> sx = Between(env, FactKind::kSharded, x, xp);
    std::vector<const Fact*> sy = Between(env, FactKind::kSharded, y, yp);
    const ClassId zc = ClassOf(env, zb), zdc = ClassOf(env, zd);
    for (const Fact* a : sx) {
      for (const Fact* b : sy) {
        if (a->group != b->group) continue;
        if (partial && a->dim == rx - 1 && b->dim == ry - 2) {
          out.push_back(Fact::Partial(zc, zdc, a->group, Combiner::kAdd));
        }
        if (!partial && rx == ry && a->dim == b->dim && a->dim < rx - 2) {
          out.push_back(Fact::Sharded(zc, zdc, a->dim, a->group));
        }
      }
      if (partial) continue;
      if (DupOver(env, y, yp, a->group)) {
        if (a->dim == rx - 2) {
          out.push_back(Fact::Sharded(zc, zdc, rz - 2, a->group));
        } else if (a->dim < rx - 2 && ry == 2) {
          out.push_back(Fact::Sharded(zc, zdc, a->dim, a->group));
        }
      }
    }
    if (partial) continue;
    for (const Fact* b : sy) {
      if (b->dim == ry - 1 && DupOver(env, x, xp, b->group)) {
        out.push_back(Fact::Sharded(zc, zdc, rz - 1, b->group));
      }
    }
  }
}

// Reductions over the sharded dim leave per-rank partial results.
void ReducePartial(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out,
                   bool over_sharded) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z)) return;
  if (z.op.code != OpCode::kMaxReduce && z.op.code != OpCode::kSumReduce) {
    return;
  }
  const Combiner op =
      z.op.code == OpCode::kMaxReduce ? Combiner::kMax : Combiner::kAdd;
  for (ENodeId zd : Counterparts(env, zb, 0, true)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kSharded, z.children[0], d.children[0])) {
      if (over_sharded && f->dim == z.op.dim) {
        out.push_back(
            Fact::Partial(ClassOf(env, zb), ClassOf(env, zd), f->group, op));
      } else if (!over_sharded && f->dim != z.op.dim) {
        int64_t dim = f->dim - (f->dim > z.op.dim ? 1 : 0);
        out.push_back(
            Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd), dim, f->group));
      }
    }
  }
}

void TransposeSharded(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kTranspose) return;
  for (ENodeId zd : Counterparts(env, zb, 0, true)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kSharded, z.children[0], d.children[0])) {
      for (size_t i = 0; i < z.op.perm.size(); ++i) {
        if (z.op.perm[i] == f->dim) {
          out.push_back(Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd),
                                      static_cast<int64_t>(i), f->group));
        }
      }
    }
  }
}

// A reshape keeps a sharding when the sharded dim starts at the same
// element offset in both shapes and the group divides the target extent.
void ReshapeSharded(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kReshape) return;
  const Shape& in = ShapeOf(env, z.children[0]);
  const Shape& s = z.op.target;
  for (ENodeId zd : Counterparts(env, zb, 0, /*same_op=*/false)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kSharded, z.children[0], d.children[0])) {
      const int64_t c = f->group.size();
      const int64_t prefix = in.PrefixProduct(f->dim);
      for (int64_t e = 0; e < s.rank(); ++e) {
        if (s.PrefixProduct(e) != prefix || s[e] % c != 0) continue;
        std::vector<int64_t> want = s.dims;
        want[e] /= c;
        if (d.op.target != Shape(want)) continue;
        out.push_back(
            Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd), e, f->group));
      }
    }
  }
}

void SliceSharded(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kSlice) return;
  for (ENodeId zd : Counterparts(env, zb, 0, true)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kSharded, z.children[0], d.children[0])) {
      if (f->dim == z.op.dim) continue;
      out.push_back(
          Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd), f->dim, f->group));
    }
  }
}

// Concatenating e copies of x against e/c copies of a replica of x gives a
// tensor sharded along the concat dim over the c replicas.
void ConcatReplicated(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kConcat || z.children.empty()) return;
  const ClassId x = Canon(env, z.children[0]);
  for (ClassId c : z.children) {
    if (Canon(env, c) != x) return;
  }
  for (ENodeId zd : Counterparts(env, zb, 0, /*same_op=*/false)) {
    const ENode& d = Node(env, zd);
    if (d.op.dim != z.op.dim || d.children.empty()) continue;
    const ClassId xp = Canon(env, d.children[0]);
    bool uniform = true;
    for (ClassId c : d.children) uniform = uniform && Canon(env, c) == xp;
    if (!uniform) continue;
    std::optional<ReplicaGroup> g = env.DupGroup(x, xp);
    if (!g.has_value()) continue;
    if (static_cast<int64_t>(z.children.size()) !=
        static_cast<int64_t>(d.children.size()) * g->size()) {
      continue;
    }
    out.push_back(
        Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd), z.op.dim, *g));
  }
}

// all-gather of a sharded tensor along its sharded dim restores it.
void AllGatherDuplicate(const RuleEnv& env, ENodeId zd,
                        std::vector<Fact>& out) {
  const ENode& z = Node(env, zd);
  if (!IsSpmd(z) || z.op.code != OpCode::kAllGather || z.children.size() != 1) {
    return;
  }
  for (const Fact* f : env.FactsOnTp(FactKind::kSharded, z.children[0])) {
    if (f->dim == z.op.dim && f->group == z.op.group) {
      out.push_back(Fact::Duplicate(f->t, ClassOf(env, zd), f->group));
    }
  }
}

// ---------------------------------------------------------------------------
// Layout rules.

LayoutTerm TransposeTerm(const std::vector<int64_t>& perm) {
  return LayoutTerm::Transpose(perm);
}

// Layout facts move through layout ops on either side. With t = l(t'):
//   z = transpose(t, p)   gives z = (l ; transpose(p))(t')
//   z' = transpose(t', p) gives t = (transpose(p^-1) ; l)(z')
//   z = reshape(t, s)     gives z = (l ; reshape(s))(t')
//   z' = reshape(t', s)   gives t = (reshape(shape(t')) ; l)(z')
// The same holds for partial facts, since a reduction over ranks commutes
// with a per-rank layout change.
void PropagateThroughLayoutOp(const RuleEnv& env, ENodeId zn, FactKind kind,
                              std::vector<Fact>& out) {
  const ENode& z = Node(env, zn);
  if (!z.op.IsLayout() || z.children.size() != 1) return;
  const ClassId x = Canon(env, z.children[0]);
  const ClassId zc = ClassOf(env, zn);
  auto emit = [&](const Fact& f, ClassId t, ClassId tp, LayoutTerm l) {
    if (Canon(env, t) == Canon(env, tp)) return;
    Fact g = f;
    g.t = t;
    g.tp = tp;
    g.layout = Canonical(l, ShapeOf(env, tp));
    out.push_back(std::move(g));
  };
  if (IsBase(z)) {
    const LayoutTerm step = z.op.code == OpCode::kTranspose
                                ? TransposeTerm(z.op.perm)
                                : LayoutTerm::Reshape(z.op.target);
    for (const Fact* f : env.FactsOnT(kind, x)) {
      emit(*f, zc, f->tp, Compose(f->layout, step));
    }
  }
  if (IsSpmd(z)) {
    const LayoutTerm undo = z.op.code == OpCode::kTranspose
                                ? TransposeTerm(InvertPermutation(z.op.perm))
                                : LayoutTerm::Reshape(ShapeOf(env, x));
    for (const Fact* f : env.FactsOnTp(kind, x)) {
      emit(*f, f->t, zc, Compose(undo, f->layout));
    }
  }
}

void LayoutThroughTranspose(const RuleEnv& env, ENodeId zn,
                            std::vector<Fact>& out) {
  if (Node(env, zn).op.code != OpCode::kTranspose) return;
  PropagateThroughLayoutOp(env, zn, FactKind::kLayout, out);
}

void LayoutThroughReshape(const RuleEnv& env, ENodeId zn,
                          std::vector<Fact>& out) {
  if (Node(env, zn).op.code != OpCode::kReshape) return;
  PropagateThroughLayoutOp(env, zn, FactKind::kLayout, out);
}

void PartialThroughLayout(const RuleEnv& env, ENodeId zn,
                          std::vector<Fact>& out) {
  PropagateThroughLayoutOp(env, zn, FactKind::kPartial, out);
}

// A layout that is the identity on the distributed shape is replication.
void IdentityLayoutDuplicate(const RuleEnv& env, const Fact& f,
                             std::vector<Fact>& out) {
  if (f.kind != FactKind::kLayout) return;
  const Shape& sp = ShapeOf(env, f.tp);
  if (ShapeOf(env, f.t) != sp || !IsIdentityOn(f.layout, sp)) return;
  out.push_back(Fact::Duplicate(f.t, f.tp, f.group));
}

// Elementwise ops keep a common layout of all non-scalar operands.
void ElemLayout(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z)) return;
  if (z.op.code != OpCode::kElemOp && z.op.code != OpCode::kConvert) return;
  size_t lead = 0;
  while (lead < z.children.size() && IsScalar(env, z.children[lead])) ++lead;
  if (lead == z.children.size()) return;
  for (ENodeId zd : Counterparts(env, zb, lead, true)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kLayout, z.children[lead], d.children[lead])) {
      bool ok = true;
      for (size_t i = 0; i < z.children.size() && ok; ++i) {
        if (i == lead) continue;
        if (IsScalar(env, z.children[i])) {
          ok = DupOver(env, z.children[i], d.children[i], f->group);
          continue;
        }
        bool found = false;
        for (const Fact* g :
             Between(env, FactKind::kLayout, z.children[i], d.children[i])) {
          if (g->layout == f->layout && g->group == f->group) found = true;
        }
        ok = found;
      }
      if (ok) {
        out.push_back(Fact::Layout(ClassOf(env, zb), ClassOf(env, zd),
                                   f->layout, f->group));
      }
    }
  }
}

// Dot operands reached through layout chains from a layout-related pair:
// the inferred bijection relates the operands directly.
void DotLayout(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kDot) return;
  const ClassId w = Canon(env, z.children[0]);
  std::vector<Chain> base_chains = BackChains(env, w, GraphKind::kBaseline);
  for (ENodeId zd : Counterparts(env, zb, 1, true)) {
    const ENode& d = Node(env, zd);
    const ClassId wp = Canon(env, d.children[0]);
    if (wp == w) continue;
    std::vector<Chain> dist_chains =
        BackChains(env, wp, GraphKind::kDistributed);
    for (const Chain& cb : base_chains) {
      for (const Chain& cd : dist_chains) {
        if (cb.seq.empty() && cd.seq.empty()) continue;
        for (const Fact* f : Between(env, FactKind::kLayout, cb.end, cd.end)) {
          BijectionResult bi =
              InferBijection(f->layout, cb.seq, cd.seq, ShapeOf(env, cb.end),
                             ShapeOf(env, cd.end));
          if (bi.bottom) continue;
          out.push_back(Fact::Layout(w, wp, bi.ops, f->group));
          if (!IsIdentityOn(bi.ops, ShapeOf(env, wp))) continue;
          const int64_t ry = ShapeOf(env, z.children[1]).rank();
          const int64_t rz = ShapeOf(env, ClassOf(env, zb)).rank();
          for (const Fact* s :
               Between(env, FactKind::kSharded, z.children[1], d.children[1])) {
            if (s->dim == ry - 1 && s->group == f->group) {
              out.push_back(Fact::Sharded(ClassOf(env, zb), ClassOf(env, zd),
                                          rz - 1, s->group));
            }
          }
        }
      }
    }
  }
}

// all-reduce over exactly the group of a partial fact with the same combiner
// discharges it; the layout carries over, and is pushed through the layout
// chains that follow on both sides.
void AllReduceDischarge(const RuleEnv& env, ENodeId zd,
                        std::vector<Fact>& out) {
  const ENode& z = Node(env, zd);
  if (!IsSpmd(z) || z.op.code != OpCode::kAllReduce || z.children.size() != 1) {
    return;
  }
  const ClassId zc = ClassOf(env, zd);
  for (const Fact* f : env.FactsOnTp(FactKind::kPartial, z.children[0])) {
    if (f->group != z.op.group || f->op != z.op.combiner) continue;
    out.push_back(Fact::Layout(f->t, zc, f->layout, f->group));
    std::vector<Chain> pb = ForwardEnds(env, f->t, GraphKind::kBaseline);
    std::vector<Chain> pd = ForwardEnds(env, zc, GraphKind::kDistributed);
    for (const Chain& cb : pb) {
      for (const Chain& cd : pd) {
        if (cb.seq.empty() && cd.seq.empty()) continue;
        BijectionResult bi = InferBijection(
            f->layout, cb.seq, cd.seq, ShapeOf(env, f->t), ShapeOf(env, zc));
        if (bi.bottom) continue;
        out.push_back(Fact::Layout(cb.end, cd.end, bi.ops, f->group));
      }
    }
  }
}

// reduce-scatter of an unpermuted partial sum leaves the reduced value
// sharded along the scatter dim.
void ReduceScatterDischarge(const RuleEnv& env, ENodeId zd,
                            std::vector<Fact>& out) {
  const ENode& z = Node(env, zd);
  if (!IsSpmd(z) || z.op.code != OpCode::kReduceScatter ||
      z.children.size() != 1 || z.op.combiner != Combiner::kAdd) {
    return;
  }
  for (const Fact* f : env.FactsOnTp(FactKind::kPartial, z.children[0])) {
    if (f->group != z.op.group || !f->layout.empty()) continue;
    if (f->op != Combiner::kAdd && f->op != Combiner::kAddConcat) continue;
    out.push_back(Fact::Sharded(f->t, ClassOf(env, zd), z.op.dim, f->group));
  }
}

// Sums and differences of partial sums are partial sums; so are negations
// and products or quotients with a replicated operand.
void PartialLinear(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kElemOp) return;
  const std::string& name = z.op.name;
  const bool additive = name == "add" || name == "sub";
  const bool scaling = name == "mul" || name == "div";
  const bool negation = name == "neg";
  if (!additive && !scaling && !negation) return;
  for (ENodeId zd : Counterparts(env, zb, 0, true)) {
    const ENode& d = Node(env, zd);
    for (const Fact* f :
         Between(env, FactKind::kPartial, z.children[0], d.children[0])) {
      if (f->op != Combiner::kAdd) continue;
      bool ok = negation;
      if (additive) {
        for (const Fact* g :
             Between(env, FactKind::kPartial, z.children[1], d.children[1])) {
          if (g->op == f->op && g->group == f->group &&
              g->layout == f->layout) {
            ok = true;
          }
        }
      } else if (scaling) {
        ok = f->layout.empty() &&
             DupOver(env, z.children[1], d.children[1], f->group);
      }
      if (ok) {
        out.push_back(Fact::Partial(ClassOf(env, zb), ClassOf(env, zd),
                                    f->group, f->op, f->layout));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Slicing and unroll rules.

// A per-rank slice of a sharded (or replicated) tensor that reads the same
// elements as a baseline slice.
void SliceAlign(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kSlice) return;
  const ClassId x = Canon(env, z.children[0]);
  for (ENodeId zd : Counterparts(env, zb, 0, /*same_op=*/false,
                                 /*spmd=*/false)) {
    const ENode& d = Node(env, zd);
    if (d.op.dim != z.op.dim || d.op.length != z.op.length) continue;
    const int64_t r = *d.rank;
    const ClassId xp = Canon(env, d.children[0]);
    const ClassId zc = ClassOf(env, zb), zdc = ClassOf(env, zd);
    for (const Fact* f : Between(env, FactKind::kSharded, x, xp)) {
      if (f->dim != z.op.dim) continue;
      const int64_t pos = f->group.PositionOf(r);
      if (pos < 0) continue;
      const int64_t local = ShapeOf(env, xp)[f->dim];
      if (z.op.start == pos * local + d.op.start) {
        out.push_back(
            Fact::Slice(zc, zdc, r, x, z.op.dim, z.op.start, z.op.length));
      }
    }
    std::optional<ReplicaGroup> g = env.DupGroup(x, xp);
    if (g.has_value() && Contains(*g, r) && d.op.start == z.op.start) {
      out.push_back(
          Fact::Slice(zc, zdc, r, x, z.op.dim, z.op.start, z.op.length));
    }
  }
}

// Each slice starts a one-element loop reduction on both sides.
void LoopRedBInit(const RuleEnv& /*env*/, const Fact& f,
                  std::vector<Fact>& out) {
  if (f.kind != FactKind::kSlice) return;
  out.push_back(Fact::LoopRedB(Combiner::kAdd, f.dim, f.t,
                               {SliceRef{f.t, f.offset, f.length}}, f.base));
}

void LoopRedDInit(const RuleEnv& /*env*/, const Fact& f,
                  std::vector<Fact>& out) {
  if (f.kind != FactKind::kSlice) return;
  out.push_back(Fact::LoopRedD(Combiner::kAdd, f.dim, f.tp,
                               {SliceRef{f.t, f.offset, f.length}}, f.base,
                               f.rank));
}

bool SameLoop(const Fact& a, const Fact& b) {
  return a.op == b.op && a.dim == b.dim && a.base == b.base;
}

// Baseline add of two disjoint partial loop reductions of the same base.
void LoopRedBStep(const RuleEnv& env, ENodeId zb, std::vector<Fact>& out) {
  const ENode& z = Node(env, zb);
  if (!IsBase(z) || z.op.code != OpCode::kElemOp || z.op.name != "add" ||
      z.children.size() != 2) {
    return;
  }
  for (const Fact* a : env.FactsOnT(FactKind::kLoopRedB, z.children[0])) {
    for (const Fact* b : env.FactsOnT(FactKind::kLoopRedB, z.children[1])) {
      if (!SameLoop(*a, *b) || !SlicesDisjoint(a->ts, b->ts)) continue;
      out.push_back(Fact::LoopRedB(a->op, a->dim, ClassOf(env, zb),
                                   SliceUnion(a->ts, b->ts), a->base));
    }
  }
}

// Rank-local add of two disjoint partial loop reductions on the same rank.
void LoopRedDStep(const RuleEnv& env, ENodeId zd, std::vector<Fact>& out) {
  const ENode& z = Node(env, zd);
  if (!z.HasSide(GraphKind::kDistributed) || !z.rank.has_value() ||
      z.op.code != OpCode::kElemOp || z.op.name != "add" ||
      z.children.size() != 2) {
    return;
  }
  for (const Fact* a : env.FactsOnTp(FactKind::kLoopRedD, z.children[0])) {
    if (a->rank != *z.rank) continue;
    for (const Fact* b : env.FactsOnTp(FactKind::kLoopRedD, z.children[1])) {
      if (b->rank != *z.rank || !SameLoop(*a, *b) ||
          !SlicesDisjoint(a->ts, b->ts)) {
        continue;
      }
      out.push_back(Fact::LoopRedD(a->op, a->dim, ClassOf(env, zd),
                                   SliceUnion(a->ts, b->ts), a->base, *z.rank));
    }
  }
}

// A per-rank all-reduce whose operand i is a partial loop reduction on
// rank G[i] combines the pieces; the result is held on every rank of G.
void LoopRedDAllReduce(const RuleEnv& env, ENodeId zd, std::vector<Fact>& out) {
  const ENode& z = Node(env, zd);
  if (z.op.code != OpCode::kAllReduce || z.op.combiner != Combiner::kAdd ||
      z.children.size() < 2 || z.children.size() != z.op.group.ranks.size()) {
    return;
  }
  // Depth-first choice of one loop fact per operand, pairwise disjoint.
  std::vector<const Fact*> chosen;
  std::function<void(size_t, std::vector<SliceRef>)> pick =
      [&](size_t i, std::vector<SliceRef> acc) {
        if (out.size() > 256) return;
        if (i == z.children.size()) {
          Fact g =
              Fact::LoopRedD(chosen[0]->op, chosen[0]->dim, ClassOf(env, zd),
                             std::move(acc), chosen[0]->base, kAllRanks);
          g.group = z.op.group;
          out.push_back(std::move(g));
          return;
        }
        for (const Fact* f :
             env.FactsOnTp(FactKind::kLoopRedD, z.children[i])) {
          if (f->rank != z.op.group.ranks[i]) continue;
          if (i > 0 && !SameLoop(*f, *chosen[0])) continue;
          if (!SlicesDisjoint(acc, f->ts)) continue;
          chosen.push_back(f);
          pick(i + 1, SliceUnion(acc, f->ts));
          chosen.pop_back();
        }
      };
  pick(0, {});
}

// Matching loop reductions over the same slices are equal; the all-rank
// distributed side is replicated over its group.
void LoopRedJoin(const RuleEnv& env, const Fact& f, std::vector<Fact>& out) {
  if (f.kind != FactKind::kLoopRedB && f.kind != FactKind::kLoopRedD) return;
  for (int64_t pos : env.db().About(f.base)) {
    const Fact& g = env.db().facts()[pos].fact;
    const Fact* b = nullptr;
    const Fact* d = nullptr;
    if (f.kind == FactKind::kLoopRedB && g.kind == FactKind::kLoopRedD) {
      b = &f;
      d = &g;
    } else if (f.kind == FactKind::kLoopRedD && g.kind == FactKind::kLoopRedB) {
      b = &g;
      d = &f;
    } else {
      continue;
    }
    if (d->rank != kAllRanks || !SameLoop(*b, *d) || b->ts != d->ts) continue;
    if (Canon(env, b->t) == Canon(env, d->tp)) continue;
    out.push_back(Fact::Duplicate(b->t, d->tp, d->group));
  }
}

// ---------------------------------------------------------------------------
// Catalog.

enum Form : unsigned { kTp = 1, kSp = 2, kEp = 4, kAll = 7 };

struct Entry {
  Rule rule;
  unsigned forms;
};

Rule NodeRule(std::string id, RuleFamily family, std::string body,
              std::string head, std::string note, NodeMatcher m) {
  Rule r;
  r.id = std::move(id);
  r.family = family;
  r.body = std::move(body);
  r.head = std::move(head);
  r.note = std::move(note);
  r.on_node = std::move(m);
  return r;
}

Rule FactRule(std::string id, RuleFamily family, std::string body,
              std::string head, std::string note, FactMatcher m) {
  Rule r = NodeRule(std::move(id), family, std::move(body), std::move(head),
                    std::move(note), nullptr);
  r.on_fact = std::move(m);
  return r;
}

std::vector<Entry> BuildEntries() {
  using F = RuleFamily;
  std::vector<Entry> e;
  auto add = [&](Rule r, unsigned forms) {
    e.push_back(Entry{std::move(r), forms});
  };
  add(NodeRule("P1-elem-sharded", F::kPartition,
               "sharded(x, x', d, c), z = elem_op(x, ...), "
               "z' = elem_op'(x', ...)",
               "sharded(z, z', d, c)",
               "every non-scalar operand is sharded the same way; scalar "
               "operands are replicated over c",
               ElemSharded),
      kTp | kSp | kEp);
  add(NodeRule("P2-dot-partial", F::kMixed,
               "sharded(x, x', rank(x)-1, c), sharded(y, y', rank(y)-2, c), "
               "z = dot(x, y), z' = dot'(x', y')",
               "partial(z, z', c, add)",
               "the contracted dim is sharded on both operands",
               [](const RuleEnv& env, ENodeId n, std::vector<Fact>& out) {
                 DotPartition(env, n, out, /*partial=*/true);
               }),
      kTp | kSp);
  add(NodeRule("L3-dot-layout", F::kLayout,
               "layout(x, x', l, c), x ~> w, x' ~> w', z = dot(w, y), "
               "z' = dot'(w', y'), sharded(y, y', d, c)",
               "layout(w, w', l', c), l' = bijection_inference(l, x ~> w, "
               "x' ~> w'); sharded(z, z', rank(z)-1, c) when l' is the "
               "identity and d is the last dim of y",
               "layout chains are followed up to 8 steps", DotLayout),
      kTp);
  add(NodeRule("L4-transpose-layout", F::kLayout,
               "layout(x, x', l, c), z = transpose(x, p) "
               "| z' = transpose'(x', p)",
               "layout(z, x', l ; transpose(p), c) "
               "| layout(x, z', transpose(p^-1) ; l, c)",
               "layouts are kept in normal form", LayoutThroughTranspose),
      kTp | kSp);
  add(NodeRule("L5-reshape-layout", F::kLayout,
               "layout(x, x', l, c), z' = reshape'(x', s') | z = reshape(x, s)",
               "layout(x, z', reshape(shape(x')) ; l, c) "
               "| layout(z, x', l ; reshape(s), c)",
               "layouts are kept in normal form", LayoutThroughReshape),
      kTp | kSp);
  add(NodeRule("L6-allreduce-discharge", F::kMixed,
               "partial(x, x', c, op, l), z' = all_reduce'(x', c, op)",
               "layout(x, z', l, c); layout(p, q', l', c) with l' = "
               "bijection_inference(l, x ~> p, z' ~> q')",
               "p and q' are the ends of the layout chains after x and z'",
               AllReduceDischarge),
      kTp | kSp);
  add(NodeRule("L7-reducescatter-discharge", F::kMixed,
               "partial(x, x', c, add | add-concat, []), "
               "z' = reduce_scatter'(x', d, c, add)",
               "sharded(x, z', d, c)", "", ReduceScatterDischarge),
      kSp);
  add(NodeRule("P8-allgather-duplicate", F::kPartition,
               "sharded(x, x', d, c), z' = all_gather'(x', d, c)",
               "duplicate(x, z', c)", "", AllGatherDuplicate),
      kSp);
  add(FactRule("L9-applylayout-duplicate", F::kLayout,
               "layout(x, x', l, c), l is the identity on shape(x')",
               "duplicate(x, x', c)",
               "covers apply_layout' of l, which the layout rules fold into "
               "the relation",
               IdentityLayoutDuplicate),
      kTp | kSp);
  add(NodeRule("P10-maxreduce-partial", F::kMixed,
               "sharded(x, x', d, c), z = max_reduce(x, d), "
               "z' = max_reduce'(x', d)",
               "partial(z, z', c, max)", "sum_reduce gives partial(..., add)",
               [](const RuleEnv& env, ENodeId n, std::vector<Fact>& out) {
                 ReducePartial(env, n, out, /*over_sharded=*/true);
               }),
      kTp);
  add(NodeRule("S11-slice-align", F::kSlicing,
               "sharded(x, x', d, c), z = slice(x, d, j, l), "
               "z' = slice'(x', d, k, l), rank(z') = r, "
               "j = pos(r, c) * extent(x', d) + k",
               "slice(z, z', r, x, d, j, l)",
               "replicated x' with k = j relates the same way", SliceAlign),
      kTp | kEp);
  add(FactRule("U12-loopredB-init", F::kUnroll, "slice(x, x', r, b, d, j, l)",
               "loop_red_B(add, d, x, {x@j+l}, b)", "", LoopRedBInit),
      kEp);
  add(NodeRule("U13-loopredB-step", F::kUnroll,
               "z = add(x, y), loop_red_B(add, d, x, xs, b), "
               "loop_red_B(add, d, y, ys, b), xs and ys disjoint",
               "loop_red_B(add, d, z, xs + ys, b)", "", LoopRedBStep),
      kEp);
  add(FactRule("U14-loopredD-init", F::kUnroll, "slice(x, x', r, b, d, j, l)",
               "loop_red_D(add, d, x', {x@j+l}, b, r)", "", LoopRedDInit),
      kEp);
  add(NodeRule("U15-loopredD-step", F::kUnroll,
               "z' = add'(x', y') on rank r, loop_red_D(add, d, x', xs, b, r), "
               "loop_red_D(add, d, y', ys, b, r), xs and ys disjoint",
               "loop_red_D(add, d, z', xs + ys, b, r)", "", LoopRedDStep),
      kEp);
  add(NodeRule("U16-loopredD-allreduce", F::kUnroll,
               "z' = all_reduce'(x'_0, ..., x'_n, c, add), "
               "loop_red_D(add, d, x'_i, xs_i, b, c[i]), xs_i disjoint",
               "loop_red_D(add, d, z', union of xs_i, b, ALL) over c", "",
               LoopRedDAllReduce),
      kEp);
  add(FactRule("U17-loopred-duplicate", F::kUnroll,
               "loop_red_B(add, d, z, xs, b), loop_red_D(add, d, z', xs, b, "
               "ALL) over c",
               "duplicate(z, z', c)", "", LoopRedJoin),
      kEp);
  // Closures that every form needs.
  add(NodeRule("C-dup-congruence", F::kPartition,
               "z = op(x_1, ..., x_n), z' = op'(x'_1, ..., x'_n), "
               "duplicate(x_i, x'_i, c) for all i",
               "duplicate(z, z', c)",
               "replication over the whole world merges classes instead",
               DupCongruence),
      kAll);
  add(NodeRule("C-dot-sharded", F::kPartition,
               "z = dot(x, y), z' = dot'(x', y') with one operand sharded on "
               "a batch or free dim and the other replicated, or both sharded "
               "on the same batch dim",
               "sharded(z, z', e, c), e the matching output dim", "",
               [](const RuleEnv& env, ENodeId n, std::vector<Fact>& out) {
                 DotPartition(env, n, out, /*partial=*/false);
               }),
      kAll);
  add(NodeRule("C-layout-elem", F::kLayout,
               "layout(x_i, x'_i, l, c) for all non-scalar operands, "
               "z = elem_op(x_1, ...), z' = elem_op'(x'_1, ...)",
               "layout(z, z', l, c)", "", ElemLayout),
      kAll);
  add(NodeRule("C-partial-linear", F::kPartition,
               "partial(x, x', c, add, l), partial(y, y', c, add, l), "
               "z = add | sub(x, y); or z = neg(x); or z = mul | div(x, y) "
               "with y replicated and l = []",
               "partial(z, z', c, add, l)", "", PartialLinear),
      kAll);
  add(NodeRule("C-partial-layout", F::kLayout,
               "partial(x, x', c, op, l) followed by a layout op on either "
               "side",
               "partial with the layout updated as for layout facts", "",
               PartialThroughLayout),
      kAll);
  add(NodeRule("C-reduce-sharded", F::kPartition,
               "sharded(x, x', d, c), z = reduce(x, e), z' = reduce'(x', e), "
               "e != d",
               "sharded(z, z', d - [d > e], c)", "",
               [](const RuleEnv& env, ENodeId n, std::vector<Fact>& out) {
                 ReducePartial(env, n, out, /*over_sharded=*/false);
               }),
      kAll);
  add(NodeRule("C-transpose-sharded", F::kPartition,
               "sharded(x, x', d, c), z = transpose(x, p), "
               "z' = transpose'(x', p)",
               "sharded(z, z', i, c) with p[i] = d", "", TransposeSharded),
      kAll);
  add(NodeRule(
          "C-reshape-sharded", F::kPartition,
          "sharded(x, x', d, c), z = reshape(x, s), z' = reshape'(x', s'), "
          "prefix(s, e) = prefix(shape(x), d), s' = s with s'[e] = s[e]/|c|",
          "sharded(z, z', e, c)", "", ReshapeSharded),
      kAll);
  add(NodeRule("C-slice-sharded", F::kPartition,
               "sharded(x, x', d, c), z = slice(x, e, j, l), "
               "z' = slice'(x', e, j, l), e != d",
               "sharded(z, z', d, c)", "", SliceSharded),
      kAll);
  add(NodeRule("C-concat-replicated", F::kPartition,
               "z = concat(x, ..., x; dim d) with m copies, "
               "z' = concat'(x', ..., x'; dim d) with m/|c| copies, "
               "duplicate(x, x', c)",
               "sharded(z, z', d, c)", "", ConcatReplicated),
      kAll);
  return e;
}

const std::vector<Entry>& Entries() {
  static const std::vector<Entry>* entries =
      new std::vector<Entry>(BuildEntries());
  return *entries;
}

}  // namespace

std::string ParallelismFlags::ToString() const {
  std::vector<std::string> parts;
  if (tp) parts.push_back("tp");
  if (sp) parts.push_back("sp");
  if (ep) parts.push_back("ep");
  return absl::StrJoin(parts, ",");
}

absl::StatusOr<ParallelismFlags> ParseParallelismFlags(absl::string_view text) {
  ParallelismFlags f{false, false, false};
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    part = absl::StripAsciiWhitespace(part);
    if (part == "tp") {
      f.tp = true;
    } else if (part == "sp") {
      f.sp = true;
    } else if (part == "ep") {
      f.ep = true;
    } else if (part == "all") {
      f = ParallelismFlags{};
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown parallelism form '", part, "'"));
    }
  }
  if (!f.tp && !f.sp && !f.ep) {
    return absl::InvalidArgumentError("no parallelism form selected");
  }
  return f;
}

const Rule* RuleCatalog::Find(absl::string_view id) const {
  for (const Rule* r : rules_) {
    if (r->id == id) return r;
  }
  return nullptr;
}

std::vector<std::string> RuleCatalog::Ids() const {
  std::vector<std::string> ids;
  for (const Rule* r : rules_) ids.push_back(r->id);
  return ids;
}

const std::vector<Rule>& AllRules() {
  static const std::vector<Rule>* rules = [] {
    auto* v = new std::vector<Rule>();
    for (const Entry& e : Entries()) v->push_back(e.rule);
    return v;
  }();
  return *rules;
}

RuleCatalog DefaultCatalog(ParallelismFlags flags) {
  unsigned forms = 0;
  if (flags.tp) forms |= kTp;
  if (flags.sp) forms |= kSp;
  if (flags.ep) forms |= kEp;
  std::vector<const Rule*> rules;
  const std::vector<Rule>& all = AllRules();
  for (size_t i = 0; i < all.size(); ++i) {
    if (Entries()[i].forms & forms) rules.push_back(&all[i]);
  }
  return RuleCatalog(std::move(rules), flags);
}

absl::StatusOr<RuleCatalog> CatalogFromIds(
    const std::vector<std::string>& ids) {
  std::set<std::string> wanted;
  for (const std::string& id : ids) {
    bool known = false;
    for (const Rule& r : AllRules()) known = known || r.id == id;
    if (!known) return absl::NotFoundError(absl::StrCat("unknown rule ", id));
    wanted.insert(id);
  }
  std::vector<const Rule*> rules;
  for (const Rule& r : AllRules()) {
    if (wanted.count(r.id)) rules.push_back(&r);
  }
  return RuleCatalog(std::move(rules), ParallelismFlags{});
}

absl::StatusOr<RuleCatalog> ParseCatalogFile(absl::string_view text) {
  std::vector<std::string> ids;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    line = line.substr(0, std::min(line.find('#'), line.size()));
    line = absl::StripAsciiWhitespace(line);
    if (!line.empty()) ids.emplace_back(line);
  }
  if (ids.empty())
    return absl::InvalidArgumentError("rule file lists no rules");
  return CatalogFromIds(ids);
}

absl::StatusOr<std::string> ExplainRule(absl::string_view id) {
  for (const Rule& r : AllRules()) {
    if (r.id != id) continue;
    std::string text =
        absl::StrCat(r.id, " (", RuleFamilyName(r.family),
                     ")\n  if:   ", r.body, "\n  then: ", r.head, "\n");
    if (!r.note.empty()) absl::StrAppend(&text, "  note: ", r.note, "\n");
    return text;
  }
  return absl::NotFoundError(absl::StrCat("unknown rule ", id));
}

}  // namespace graphcheck
