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

#ifndef GRAPHCHECK_BUILDER_H_
#define GRAPHCHECK_BUILDER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphcheck/ir.h"

namespace graphcheck {

// Appends nodes with inferred shapes and dtypes. Ill-formed additions abort:
// the builder is for graphs that are valid by construction.
class GraphBuilder {
 public:
  explicit GraphBuilder(GraphKind kind) : graph_(kind) {}

  // Tags for subsequently added nodes.
  void set_layer(std::optional<int64_t> layer) { layer_ = layer; }
  void set_rank(std::optional<int64_t> rank) { rank_ = rank; }
  // Source file for subsequent nodes; lines count up from 1 per builder.
  void set_file(std::string file) { file_ = std::move(file); }

  std::string Input(const std::string& id, Shape shape,
                    DType dtype = DType::kF32);
  std::string Constant(const std::string& id, int64_t value, Shape shape,
                       DType dtype = DType::kF32);
  std::string Add(const std::string& id, OpKind op,
                  std::vector<std::string> inputs);

  // Convenience wrappers around Add.
  std::string Elem(const std::string& id, const std::string& name,
                   std::vector<std::string> inputs);
  std::string Dot(const std::string& id, const std::string& x,
                  const std::string& y);
  std::string Transpose(const std::string& id, const std::string& x,
                        std::vector<int64_t> perm);
  std::string Reshape(const std::string& id, const std::string& x,
                      Shape target);

  const Shape& ShapeOf(const std::string& id) const;
  void AddOutput(const std::string& id) { graph_.AddOutput(id); }
  const Graph& graph() const { return graph_; }
  Graph Build() && { return std::move(graph_); }

 private:
  std::string Push(TensorNode node);

  Graph graph_;
  std::optional<int64_t> layer_;
  std::optional<int64_t> rank_;
  std::string file_;
  int64_t line_ = 0;
};

}  // namespace graphcheck

#endif  // GRAPHCHECK_BUILDER_H_
