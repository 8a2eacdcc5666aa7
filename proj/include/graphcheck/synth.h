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

#ifndef GRAPHCHECK_SYNTH_H_
#define GRAPHCHECK_SYNTH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "graphcheck/ir.h"

namespace graphcheck {

enum class ModelKind { kMlp, kAttention, kMoe };

absl::string_view ModelKindName(ModelKind kind);
absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name);

// Toy transformer-style model. Tokens are batch * seqlen rows; attention
// treats them as one sequence.
struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  int64_t layers = 1;
  int64_t hidden = 8;
  int64_t heads = 2;
  int64_t seqlen = 4;
  int64_t batch = 1;
  int64_t experts = 4;  // moe only

  int64_t tokens() const { return batch * seqlen; }
  int64_t ffn() const { return 2 * hidden; }
  std::string ToString() const;
};

absl::Status ValidateModelSpec(const ModelSpec& spec);

enum class Strategy { kTp, kSp, kEp };

absl::string_view StrategyName(Strategy s);
absl::StatusOr<Strategy> ParseStrategy(absl::string_view name);

struct ParallelPlan {
  Strategy strategy = Strategy::kTp;
  int64_t degree = 2;
  bool unrolled = true;  // ep: per-rank expert loops

  ReplicaGroup group() const;
  std::string ToString() const;  // "tp(4)"
};

struct ModelPair {
  Graph base{GraphKind::kBaseline};
  Graph dist{GraphKind::kDistributed};
  AnnotationSet ann;
};

// Baseline graph with layer tags and source locations.
absl::StatusOr<Graph> BuildBaseline(const ModelSpec& spec);

// Baseline plus a distributed graph implementing it under `plan`, with input
// annotations. tp shards weights Megatron-style and all-reduces; sp shards
// the token dim between layers with all-gather and reduce-scatter; ep places
// experts on ranks and combines per-rank slice sums with an all-reduce.
// Dense models under ep are replicated. IndivisibleDim errors when the
// degree does not divide the sharded extent.
absl::StatusOr<ModelPair> Parallelize(const ModelSpec& spec,
                                      const ParallelPlan& plan);

// The five bug categories: 1 collective deleted, duplicated or its combiner
// swapped; 2 replica group shrunk or rotated; 3 convert inserted on one
// side; 4 reshape split boundary changed; 5 layout sequence reordered.
struct BugInjection {
  int category = 1;
  std::string site;      // distributed node id
  std::string mutation;  // "delete", "duplicate", "swap", "shrink", ...
  // Node whose status localizes the bug: the injected node, or for a
  // deletion the deleted collective's operand.
  std::string expected_site;
};

// Applicable injections of `category` on the distributed graph, in graph
// order.
std::vector<BugInjection> InjectionSites(const ModelPair& pair, int category);

// Applies one mutation; the result is re-validated. InapplicableSite when
// the site does not admit the mutation.
absl::StatusOr<ModelPair> Inject(const ModelPair& pair,
                                 const BugInjection& bug);

// One verification case with its ground truth: correct pairs carry no bug.
struct CorpusCase {
  std::string name;
  ModelSpec spec;
  ParallelPlan plan;
  std::optional<BugInjection> bug;
  ModelPair pair;
};

// Bug corpus: for a fixed list of model/plan configurations, up to
// `per_category` injections of each applicable category. Injections that
// the oracle cannot tell apart from the baseline on `seeds` seeds are
// dropped, so every case manifests.
absl::StatusOr<std::vector<CorpusCase>> BuildBugCorpus(int per_category = 2,
                                                       int seeds = 3);

// Correct pairs for the configuration matrix: every model kind under
// tp{2,4,8}, sp{4}, ep{2,4}.
absl::StatusOr<std::vector<CorpusCase>> BuildCorrectCorpus();

// Recomputes shapes and dtypes in topological order after graph surgery.
absl::Status Reinfer(Graph& g);

}  // namespace graphcheck

#endif  // GRAPHCHECK_SYNTH_H_
