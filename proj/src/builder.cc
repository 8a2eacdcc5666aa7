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

#include "graphcheck/builder.h"

#include <cstdio>
#include <cstdlib>

namespace graphcheck {

std::string GraphBuilder::Push(TensorNode node) {
  node.layer = layer_;
  if (graph_.kind() == GraphKind::kDistributed && !node.op.IsCollective()) {
    node.rank = rank_;
  }
  if (!file_.empty()) {
    node.loc = SourceLoc{file_, ++line_, node.op.ToString()};
  }
  std::string id = node.id;
  absl::Status s = graph_.AddNode(std::move(node));
  if (!s.ok()) {
    std::fprintf(stderr, "GraphBuilder: %s\n",
                 std::string(s.message()).c_str());
    std::abort();
  }
  return id;
}

std::string GraphBuilder::Input(const std::string& id, Shape shape,
                                DType dtype) {
  TensorNode n;
  n.id = id;
  n.op = OpKind::Input();
  n.shape = std::move(shape);
  n.dtype = dtype;
  return Push(std::move(n));
}

std::string GraphBuilder::Constant(const std::string& id, int64_t value,
                                   Shape shape, DType dtype) {
  TensorNode n;
  n.id = id;
  n.op = OpKind::Constant(value);
  n.shape = std::move(shape);
  n.dtype = dtype;
  return Push(std::move(n));
}

std::string GraphBuilder::Add(const std::string& id, OpKind op,
                              std::vector<std::string> inputs) {
  std::vector<Shape> shapes;
  DType dtype = DType::kExact;
  for (const std::string& in : inputs) {
    const TensorNode* n = graph_.Find(in);
    if (n == nullptr) {
      std::fprintf(stderr, "GraphBuilder: unknown input %s for %s\n",
                   in.c_str(), id.c_str());
      std::abort();
    }
    shapes.push_back(n->shape);
    dtype = PromoteDType(dtype, n->dtype);
  }
  absl::StatusOr<Shape> shape = InferShape(op, shapes);
  if (!shape.ok()) {
    std::fprintf(stderr, "GraphBuilder: %s: %s\n", id.c_str(),
                 std::string(shape.status().message()).c_str());
    std::abort();
  }
  TensorNode n;
  n.id = id;
  if (op.code == OpCode::kConvert) dtype = op.dtype;
  n.op = std::move(op);
  n.inputs = std::move(inputs);
  n.shape = *std::move(shape);
  n.dtype = dtype;
  return Push(std::move(n));
}

std::string GraphBuilder::Elem(const std::string& id, const std::string& name,
                               std::vector<std::string> inputs) {
  return Add(id, OpKind::Elem(name), std::move(inputs));
}

std::string GraphBuilder::Dot(const std::string& id, const std::string& x,
                              const std::string& y) {
  return Add(id, OpKind::Dot(), {x, y});
}

std::string GraphBuilder::Transpose(const std::string& id, const std::string& x,
                                    std::vector<int64_t> perm) {
  return Add(id, OpKind::Transpose(std::move(perm)), {x});
}

std::string GraphBuilder::Reshape(const std::string& id, const std::string& x,
                                  Shape target) {
  return Add(id, OpKind::Reshape(std::move(target)), {x});
}

const Shape& GraphBuilder::ShapeOf(const std::string& id) const {
  return graph_.Get(id).shape;
}

}  // namespace graphcheck
