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

#include "graphcheck/graph_io.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace graphcheck {
namespace {

using json = nlohmann::json;

absl::Status Malformed(absl::string_view where, absl::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("malformed ", where, ": ", what));
}

absl::StatusOr<std::vector<int64_t>> IntList(const json& j,
                                             absl::string_view where) {
  if (!j.is_array()) return Malformed(where, "expected an integer list");
  std::vector<int64_t> out;
  for (const json& v : j) {
    if (!v.is_number_integer()) {
      return Malformed(where, "expected an integer list");
    }
    out.push_back(v.get<int64_t>());
  }
  return out;
}

absl::StatusOr<int64_t> IntAttr(const json& attrs, const char* key,
                                absl::string_view where) {
  if (!attrs.contains(key) || !attrs[key].is_number_integer()) {
    return Malformed(where,
                     absl::StrCat("missing integer attribute '", key, "'"));
  }
  return attrs[key].get<int64_t>();
}

absl::StatusOr<std::string> StrAttr(const json& attrs, const char* key,
                                    absl::string_view where) {
  if (!attrs.contains(key) || !attrs[key].is_string()) {
    return Malformed(where,
                     absl::StrCat("missing string attribute '", key, "'"));
  }
  return attrs[key].get<std::string>();
}

absl::StatusOr<ReplicaGroup> GroupAttr(const json& attrs,
                                       absl::string_view where) {
  if (!attrs.contains("group")) return Malformed(where, "missing 'group'");
  absl::StatusOr<std::vector<int64_t>> ranks = IntList(attrs["group"], where);
  if (!ranks.ok()) return ranks.status();
  return ReplicaGroup{*std::move(ranks)};
}

absl::StatusOr<OpKind> ParseOp(const std::string& name, const json& attrs,
                               absl::string_view where) {
  absl::StatusOr<OpCode> code = ParseOpCode(name);
  if (!code.ok()) return code.status();
  OpKind op;
  op.code = *code;
  switch (op.code) {
    case OpCode::kInput:
    case OpCode::kDot:
      break;
    case OpCode::kConstant: {
      if (attrs.contains("value")) {
        absl::StatusOr<int64_t> v = IntAttr(attrs, "value", where);
        if (!v.ok()) return v.status();
        op.value = *v;
      }
      break;
    }
    case OpCode::kElemOp: {
      absl::StatusOr<std::string> n = StrAttr(attrs, "name", where);
      if (!n.ok()) return n.status();
      op.name = *n;
      break;
    }
    case OpCode::kTranspose: {
      if (!attrs.contains("perm")) return Malformed(where, "missing 'perm'");
      absl::StatusOr<std::vector<int64_t>> p = IntList(attrs["perm"], where);
      if (!p.ok()) return p.status();
      op.perm = *std::move(p);
      break;
    }
    case OpCode::kReshape: {
      if (!attrs.contains("shape")) return Malformed(where, "missing 'shape'");
      absl::StatusOr<std::vector<int64_t>> s = IntList(attrs["shape"], where);
      if (!s.ok()) return s.status();
      op.target = Shape(*std::move(s));
      break;
    }
    case OpCode::kSlice: {
      for (auto [key, field] :
           {std::pair{"dim", &op.dim}, std::pair{"start", &op.start},
            std::pair{"length", &op.length}}) {
        absl::StatusOr<int64_t> v = IntAttr(attrs, key, where);
        if (!v.ok()) return v.status();
        *field = *v;
      }
      break;
    }
    case OpCode::kMaxReduce:
    case OpCode::kSumReduce:
    case OpCode::kConcat: {
      absl::StatusOr<int64_t> v = IntAttr(attrs, "dim", where);
      if (!v.ok()) return v.status();
      op.dim = *v;
      break;
    }
    case OpCode::kConvert: {
      absl::StatusOr<std::string> n = StrAttr(attrs, "dtype", where);
      if (!n.ok()) return n.status();
      absl::StatusOr<DType> d = ParseDType(*n);
      if (!d.ok()) return d.status();
      op.dtype = *d;
      break;
    }
    case OpCode::kAllReduce:
    case OpCode::kAllGather:
    case OpCode::kReduceScatter: {
      absl::StatusOr<ReplicaGroup> g = GroupAttr(attrs, where);
      if (!g.ok()) return g.status();
      op.group = *std::move(g);
      if (op.code != OpCode::kAllReduce) {
        absl::StatusOr<int64_t> v = IntAttr(attrs, "dim", where);
        if (!v.ok()) return v.status();
        op.dim = *v;
      }
      if (op.code != OpCode::kAllGather) {
        absl::StatusOr<std::string> c = StrAttr(attrs, "combiner", where);
        if (!c.ok()) return c.status();
        absl::StatusOr<Combiner> comb = ParseCombiner(*c);
        if (!comb.ok()) return comb.status();
        op.combiner = *comb;
      }
      break;
    }
  }
  return op;
}

json OpAttrs(const OpKind& op) {
  json attrs = json::object();
  switch (op.code) {
    case OpCode::kInput:
    case OpCode::kDot:
      break;
    case OpCode::kConstant:
      attrs["value"] = op.value;
      break;
    case OpCode::kElemOp:
      attrs["name"] = op.name;
      break;
    case OpCode::kTranspose:
      attrs["perm"] = op.perm;
      break;
    case OpCode::kReshape:
      attrs["shape"] = op.target.dims;
      break;
    case OpCode::kSlice:
      attrs["dim"] = op.dim;
      attrs["start"] = op.start;
      attrs["length"] = op.length;
      break;
    case OpCode::kMaxReduce:
    case OpCode::kSumReduce:
    case OpCode::kConcat:
      attrs["dim"] = op.dim;
      break;
    case OpCode::kConvert:
      attrs["dtype"] = std::string(DTypeName(op.dtype));
      break;
    case OpCode::kAllReduce:
    case OpCode::kAllGather:
    case OpCode::kReduceScatter:
      attrs["group"] = op.group.ranks;
      if (op.code != OpCode::kAllReduce) attrs["dim"] = op.dim;
      if (op.code != OpCode::kAllGather) {
        attrs["combiner"] = std::string(CombinerName(op.combiner));
      }
      break;
  }
  return attrs;
}

absl::StatusOr<json> ParseJson(absl::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("parse error at byte ", e.byte, ": ", e.what()));
  }
}

absl::StatusOr<TensorNode> ParseNode(const json& j) {
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    return Malformed("node", "missing string 'id'");
  }
  TensorNode n;
  n.id = j["id"].get<std::string>();
  std::string where = absl::StrCat("node ", n.id);
  if (!j.contains("op") || !j["op"].is_string()) {
    return Malformed(where, "missing string 'op'");
  }
  json attrs = j.contains("attrs") ? j["attrs"] : json::object();
  if (!attrs.is_object()) return Malformed(where, "'attrs' must be an object");
  absl::StatusOr<OpKind> op = ParseOp(j["op"].get<std::string>(), attrs, where);
  if (!op.ok()) return op.status();
  n.op = *std::move(op);
  if (j.contains("inputs")) {
    if (!j["inputs"].is_array())
      return Malformed(where, "'inputs' must be a list");
    for (const json& in : j["inputs"]) {
      if (!in.is_string()) return Malformed(where, "input ids must be strings");
      n.inputs.push_back(in.get<std::string>());
    }
  }
  if (!j.contains("shape")) return Malformed(where, "missing 'shape'");
  absl::StatusOr<std::vector<int64_t>> dims = IntList(j["shape"], where);
  if (!dims.ok()) return dims.status();
  n.shape = Shape(*std::move(dims));
  if (!j.contains("dtype") || !j["dtype"].is_string()) {
    return Malformed(where, "missing 'dtype'");
  }
  absl::StatusOr<DType> dtype = ParseDType(j["dtype"].get<std::string>());
  if (!dtype.ok()) return dtype.status();
  n.dtype = *dtype;
  if (j.contains("rank")) {
    if (!j["rank"].is_number_integer()) return Malformed(where, "bad 'rank'");
    n.rank = j["rank"].get<int64_t>();
  }
  if (j.contains("layer")) {
    if (!j["layer"].is_number_integer()) return Malformed(where, "bad 'layer'");
    n.layer = j["layer"].get<int64_t>();
  }
  if (j.contains("loc")) {
    const json& l = j["loc"];
    if (!l.is_object() || !l.contains("file") || !l["file"].is_string() ||
        !l.contains("line") || !l["line"].is_number_integer()) {
      return Malformed(where, "'loc' needs string 'file' and integer 'line'");
    }
    SourceLoc loc;
    loc.file = l["file"].get<std::string>();
    loc.line = l["line"].get<int64_t>();
    if (loc.file.empty() || loc.line < 1) {
      return Malformed(where, "'loc' needs a nonempty file and positive line");
    }
    if (l.contains("expr") && l["expr"].is_string()) {
      loc.expr = l["expr"].get<std::string>();
    }
    n.loc = std::move(loc);
  }
  return n;
}

}  // namespace

absl::StatusOr<Graph> ParseGraphUnvalidated(absl::string_view text) {
  absl::StatusOr<json> parsed = ParseJson(text);
  if (!parsed.ok()) return parsed.status();
  const json& j = *parsed;
  if (!j.is_object()) return Malformed("graph", "top level must be an object");
  Graph g;
  if (j.contains("kind")) {
    if (j["kind"] == "baseline") {
      g.set_kind(GraphKind::kBaseline);
    } else if (j["kind"] == "distributed") {
      g.set_kind(GraphKind::kDistributed);
    } else {
      return Malformed("graph", "kind must be baseline or distributed");
    }
  }
  if (!j.contains("nodes") || !j["nodes"].is_array()) {
    return Malformed("graph", "missing 'nodes' list");
  }
  for (const json& nj : j["nodes"]) {
    absl::StatusOr<TensorNode> n = ParseNode(nj);
    if (!n.ok()) return n.status();
    std::string id = n->id;
    if (!g.AddNode(*std::move(n)).ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(ValidationCodeName(ValidationCode::kDuplicateId), " at ",
                       id, ": node id defined twice"));
    }
  }
  if (j.contains("outputs")) {
    if (!j["outputs"].is_array()) return Malformed("graph", "bad 'outputs'");
    for (const json& o : j["outputs"]) {
      if (!o.is_string())
        return Malformed("graph", "output ids must be strings");
      g.AddOutput(o.get<std::string>());
    }
  }
  return g;
}

absl::StatusOr<Graph> ParseGraph(absl::string_view text) {
  absl::StatusOr<Graph> g = ParseGraphUnvalidated(text);
  if (!g.ok()) return g.status();
  std::vector<ValidationError> errors = ValidateGraph(*g);
  if (!errors.empty()) {
    return absl::InvalidArgumentError(errors.front().ToString());
  }
  return g;
}

std::string SerializeGraph(const Graph& g) {
  json j;
  j["kind"] = std::string(GraphKindName(g.kind()));
  j["outputs"] = g.outputs();
  json nodes = json::array();
  for (const TensorNode& n : g.nodes()) {
    json nj;
    nj["id"] = n.id;
    nj["op"] = std::string(OpCodeName(n.op.code));
    nj["attrs"] = OpAttrs(n.op);
    nj["inputs"] = n.inputs;
    nj["shape"] = n.shape.dims;
    nj["dtype"] = std::string(DTypeName(n.dtype));
    if (n.rank.has_value()) nj["rank"] = *n.rank;
    if (n.layer.has_value()) nj["layer"] = *n.layer;
    if (n.loc.has_value()) {
      json l;
      l["file"] = n.loc->file;
      l["line"] = n.loc->line;
      if (!n.loc->expr.empty()) l["expr"] = n.loc->expr;
      nj["loc"] = l;
    }
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2) + "\n";
}

absl::StatusOr<AnnotationSet> ParseAnnotations(absl::string_view text) {
  absl::StatusOr<json> parsed = ParseJson(text);
  if (!parsed.ok()) return parsed.status();
  const json& j = *parsed;
  if (!j.is_object() || !j.contains("relations") ||
      !j["relations"].is_array()) {
    return Malformed("annotations", "missing 'relations' list");
  }
  AnnotationSet ann;
  for (const json& r : j["relations"]) {
    if (!r.is_object() || !r.contains("baseline") ||
        !r["baseline"].is_string()) {
      return Malformed("annotation", "missing string 'baseline'");
    }
    AnnotationEntry e;
    e.baseline_id = r["baseline"].get<std::string>();
    std::string where = absl::StrCat("annotation for ", e.baseline_id);
    if (!r.contains("distributed"))
      return Malformed(where, "missing 'distributed'");
    if (r["distributed"].is_string()) {
      e.distributed_ids.push_back(r["distributed"].get<std::string>());
    } else if (r["distributed"].is_array()) {
      for (const json& d : r["distributed"]) {
        if (!d.is_string())
          return Malformed(where, "distributed ids must be strings");
        e.distributed_ids.push_back(d.get<std::string>());
      }
    } else {
      return Malformed(where, "bad 'distributed'");
    }
    if (e.distributed_ids.empty())
      return Malformed(where, "no distributed ids");
    if (!r.contains("kind") || !r["kind"].is_string()) {
      return Malformed(where, "missing 'kind'");
    }
    std::string kind = r["kind"].get<std::string>();
    if (kind == "shard") {
      e.kind = RelationKindTag::kShard;
      absl::StatusOr<int64_t> dim = IntAttr(r, "dim", where);
      if (!dim.ok()) return dim.status();
      e.dim = *dim;
    } else if (kind == "replicate") {
      e.kind = RelationKindTag::kReplicate;
    } else {
      return Malformed(where, "kind must be shard or replicate");
    }
    absl::StatusOr<ReplicaGroup> g = GroupAttr(r, where);
    if (!g.ok()) return g.status();
    e.group = *std::move(g);
    ann.entries.push_back(std::move(e));
  }
  return ann;
}

std::string SerializeAnnotations(const AnnotationSet& ann) {
  json rels = json::array();
  for (const AnnotationEntry& e : ann.entries) {
    json r;
    r["baseline"] = e.baseline_id;
    r["distributed"] = e.distributed_ids;
    r["kind"] = e.kind == RelationKindTag::kShard ? "shard" : "replicate";
    if (e.kind == RelationKindTag::kShard) r["dim"] = e.dim;
    r["group"] = e.group.ranks;
    rels.push_back(std::move(r));
  }
  json j;
  j["relations"] = std::move(rels);
  return j.dump(2) + "\n";
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteFile(const std::string& path, absl::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<Graph> LoadGraph(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<Graph> g = ParseGraph(*text);
  if (!g.ok()) {
    return absl::Status(g.status().code(),
                        absl::StrCat(path, ": ", g.status().message()));
  }
  return g;
}

absl::StatusOr<AnnotationSet> LoadAnnotations(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<AnnotationSet> a = ParseAnnotations(*text);
  if (!a.ok()) {
    return absl::Status(a.status().code(),
                        absl::StrCat(path, ": ", a.status().message()));
  }
  return a;
}

}  // namespace graphcheck
