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

#ifndef GRAPHCHECK_RULES_H_
#define GRAPHCHECK_RULES_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "graphcheck/engine.h"

namespace graphcheck {

// Parallelism forms whose rules are enabled.
struct ParallelismFlags {
  bool tp = true;
  bool sp = true;
  bool ep = true;

  std::string ToString() const;  // "tp,sp,ep"
};

// "tp", "tp,sp", ... Unknown names are an error.
absl::StatusOr<ParallelismFlags> ParseParallelismFlags(absl::string_view text);

// The enabled subset of the built-in rules, in a fixed order.
class RuleCatalog {
 public:
  RuleCatalog(std::vector<const Rule*> rules, ParallelismFlags flags)
      : rules_(std::move(rules)), flags_(flags) {}

  const std::vector<const Rule*>& rules() const { return rules_; }
  const ParallelismFlags& flags() const { return flags_; }
  const Rule* Find(absl::string_view id) const;
  std::vector<std::string> Ids() const;

 private:
  std::vector<const Rule*> rules_;
  ParallelismFlags flags_;
};

// Every built-in rule, in catalog order.
const std::vector<Rule>& AllRules();

RuleCatalog DefaultCatalog(ParallelismFlags flags);

// A catalog made of exactly the listed rules (kept in catalog order).
absl::StatusOr<RuleCatalog> CatalogFromIds(const std::vector<std::string>& ids);

// Catalog description file: one rule id per line; '#' starts a comment.
absl::StatusOr<RuleCatalog> ParseCatalogFile(absl::string_view text);

// Family, premises, head and notes of a rule. NotFound for unknown ids.
absl::StatusOr<std::string> ExplainRule(absl::string_view id);

}  // namespace graphcheck

#endif  // GRAPHCHECK_RULES_H_
