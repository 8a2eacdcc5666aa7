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

#ifndef GRAPHCHECK_GRAPH_IO_H_
#define GRAPHCHECK_GRAPH_IO_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "graphcheck/ir.h"

namespace graphcheck {

// Parses the JSON graph format without running ValidateGraph. Syntax errors
// are reported as InvalidArgument "parse error at byte N: ...".
absl::StatusOr<Graph> ParseGraphUnvalidated(absl::string_view text);

// Parses and validates. Validation failures are reported as InvalidArgument
// carrying the first ValidationError ("ShapeMismatch at d1: ...").
absl::StatusOr<Graph> ParseGraph(absl::string_view text);

// Canonical serialization: nodes in insertion order, two-space indent.
std::string SerializeGraph(const Graph& g);

absl::StatusOr<AnnotationSet> ParseAnnotations(absl::string_view text);
std::string SerializeAnnotations(const AnnotationSet& ann);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, absl::string_view contents);

absl::StatusOr<Graph> LoadGraph(const std::string& path);
absl::StatusOr<AnnotationSet> LoadAnnotations(const std::string& path);

}  // namespace graphcheck

#endif  // GRAPHCHECK_GRAPH_IO_H_
