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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "graphcheck/driver.h"
#include "graphcheck/graph_io.h"
#include "graphcheck/localizer.h"
#include "graphcheck/rules.h"
#include "graphcheck/synth.h"
#include "json.hpp"

namespace graphcheck {
namespace {

constexpr int kExitUsage = 3;

struct CliConfig {
  std::string baseline;
  std::string distributed;
  std::string annotations;
  int jobs = 0;  // 0: hardware concurrency
  bool no_memo = false;
  bool no_parallel = false;
  bool no_partition = false;
  bool keep_going = false;
  std::string rules;
  std::string forms = "all";
  std::string dump_facts;
  std::string report;
  std::string format = "text";
  int64_t max_iterations = 1000;
  int64_t max_facts = 1000000;

  // gen / inject
  std::string out;
  std::string model = "mlp";
  std::string strategy = "tp";
  int64_t degree = 2;
  ModelSpec spec;
  bool corpus = false;
  int category = 1;
  std::string site;
  std::string mutation;
  bool list = false;

  std::vector<std::string> rule_ids;
};

int Fail(const absl::Status& s) {
  std::cerr << "graphcheck: " << s.message() << "\n";
  return kExitUsage;
}

absl::StatusOr<ModelPair> LoadPair(const CliConfig& cfg) {
  ModelPair pair;
  absl::StatusOr<Graph> base = LoadGraph(cfg.baseline);
  if (!base.ok()) return base.status();
  absl::StatusOr<Graph> dist = LoadGraph(cfg.distributed);
  if (!dist.ok()) return dist.status();
  absl::StatusOr<AnnotationSet> ann = LoadAnnotations(cfg.annotations);
  if (!ann.ok()) return ann.status();
  absl::Status valid = ValidateAnnotations(*ann, *base, *dist);
  if (!valid.ok()) return valid;
  pair.base = *std::move(base);
  pair.dist = *std::move(dist);
  pair.ann = *std::move(ann);
  return pair;
}

absl::Status WritePair(const std::string& dir, const ModelPair& pair) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat(dir, ": ", ec.message()));
  absl::Status s = WriteFile(dir + "/baseline.json", SerializeGraph(pair.base));
  if (!s.ok()) return s;
  s = WriteFile(dir + "/distributed.json", SerializeGraph(pair.dist));
  if (!s.ok()) return s;
  return WriteFile(dir + "/annotations.json", SerializeAnnotations(pair.ann));
}

nlohmann::ordered_json BugJson(const BugInjection& bug) {
  nlohmann::ordered_json j;
  j["category"] = bug.category;
  j["site"] = bug.site;
  j["mutation"] = bug.mutation;
  j["expected_site"] = bug.expected_site;
  return j;
}

absl::StatusOr<RuleCatalog> CatalogFor(const CliConfig& cfg) {
  absl::StatusOr<ParallelismFlags> flags = ParseParallelismFlags(cfg.forms);
  if (!flags.ok()) return flags.status();
  if (cfg.rules.empty()) return DefaultCatalog(*flags);
  absl::StatusOr<std::string> text = ReadFile(cfg.rules);
  if (!text.ok()) return text.status();
  return ParseCatalogFile(*text);
}

int RunVerify(const CliConfig& cfg) {
  absl::StatusOr<ModelPair> pair = LoadPair(cfg);
  if (!pair.ok()) return Fail(pair.status());
  absl::StatusOr<RuleCatalog> catalog = CatalogFor(cfg);
  if (!catalog.ok()) return Fail(catalog.status());
  ReportFormat format = ReportFormat::kText;
  if (cfg.format == "json") format = ReportFormat::kJson;

  VerifyOptions opts;
  opts.memo = !cfg.no_memo;
  opts.partition = !cfg.no_partition;
  opts.keep_going = cfg.keep_going;
  opts.dump_facts = !cfg.dump_facts.empty();
  opts.engine.budget.max_iterations = cfg.max_iterations;
  opts.engine.budget.max_facts = cfg.max_facts;
  int jobs = cfg.jobs;
  if (jobs <= 0) {
    jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  opts.engine.jobs = cfg.no_parallel ? 1 : jobs;

  VerificationOutcome outcome =
      VerifyPair(pair->base, pair->dist, pair->ann, *catalog, opts);
  std::string report = RenderReport(outcome.report, format);
  if (!cfg.report.empty()) {
    absl::Status s = WriteFile(cfg.report, report);
    if (!s.ok()) return Fail(s);
  }
  if (opts.dump_facts) {
    absl::Status s = WriteFile(cfg.dump_facts, outcome.fact_dump);
    if (!s.ok()) return Fail(s);
  }
  std::cout << report;
  switch (outcome.verdict) {
    case Verdict::kVerified:
      return 0;
    case Verdict::kUnverified:
      return 1;
    case Verdict::kInconclusive:
      return 2;
  }
  return kExitUsage;
}

absl::Status WriteCorpus(const std::string& dir) {
  absl::StatusOr<std::vector<CorpusCase>> correct = BuildCorrectCorpus();
  if (!correct.ok()) return correct.status();
  absl::StatusOr<std::vector<CorpusCase>> bugs = BuildBugCorpus();
  if (!bugs.ok()) return bugs.status();
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  for (const std::vector<CorpusCase>* set : {&*correct, &*bugs}) {
    for (const CorpusCase& c : *set) {
      absl::Status s = WritePair(dir + "/" + c.name, c.pair);
      if (!s.ok()) return s;
      nlohmann::ordered_json entry;
      entry["name"] = c.name;
      entry["model"] = c.spec.ToString();
      entry["plan"] = c.plan.ToString();
      entry["expected"] = c.bug.has_value() ? "unverified" : "verified";
      entry["bug"] = c.bug.has_value() ? BugJson(*c.bug) : nullptr;
      manifest.push_back(std::move(entry));
    }
  }
  return WriteFile(dir + "/corpus.manifest", manifest.dump(2) + "\n");
}

int RunGen(CliConfig cfg) {
  if (cfg.corpus) {
    absl::Status s = WriteCorpus(cfg.out);
    return s.ok() ? 0 : Fail(s);
  }
  absl::StatusOr<ModelKind> kind = ParseModelKind(cfg.model);
  if (!kind.ok()) return Fail(kind.status());
  absl::StatusOr<Strategy> strategy = ParseStrategy(cfg.strategy);
  if (!strategy.ok()) return Fail(strategy.status());
  cfg.spec.kind = *kind;
  ParallelPlan plan;
  plan.strategy = *strategy;
  plan.degree = cfg.degree;
  absl::StatusOr<ModelPair> pair = Parallelize(cfg.spec, plan);
  if (!pair.ok()) return Fail(pair.status());
  absl::Status s = WritePair(cfg.out, *pair);
  return s.ok() ? 0 : Fail(s);
}

int RunInject(const CliConfig& cfg) {
  absl::StatusOr<ModelPair> pair = LoadPair(cfg);
  if (!pair.ok()) return Fail(pair.status());
  std::vector<BugInjection> sites = InjectionSites(*pair, cfg.category);
  if (cfg.list) {
    for (const BugInjection& b : sites) std::cout << BugJson(b).dump() << "\n";
    return 0;
  }
  std::optional<BugInjection> chosen;
  for (const BugInjection& b : sites) {
    if (!cfg.site.empty() && b.site != cfg.site) continue;
    if (!cfg.mutation.empty() && b.mutation != cfg.mutation) continue;
    chosen = b;
    break;
  }
  if (!chosen.has_value()) {
    return Fail(absl::InvalidArgumentError(
        absl::StrCat("InapplicableSite: no category ", cfg.category,
                     " injection matches '", cfg.site, "'")));
  }
  absl::StatusOr<ModelPair> mutated = Inject(*pair, *chosen);
  if (!mutated.ok()) return Fail(mutated.status());
  absl::Status s = WritePair(cfg.out, *mutated);
  if (!s.ok()) return Fail(s);
  std::cout << BugJson(*chosen).dump() << "\n";
  return 0;
}

int RunExplain(const CliConfig& cfg) {
  std::vector<std::string> ids = cfg.rule_ids;
  if (ids.empty()) {
    absl::StatusOr<ParallelismFlags> flags = ParseParallelismFlags(cfg.forms);
    if (!flags.ok()) return Fail(flags.status());
    ids = DefaultCatalog(*flags).Ids();
  }
  for (size_t i = 0; i < ids.size(); ++i) {
    absl::StatusOr<std::string> text = ExplainRule(ids[i]);
    if (!text.ok()) return Fail(text.status());
    if (i > 0) std::cout << "\n";
    std::cout << *text << "\n";
  }
  return 0;
}

void AddPairOptions(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--baseline", cfg.baseline, "Baseline graph file")
      ->required();
  cmd->add_option("--distributed", cfg.distributed, "Distributed graph file")
      ->required();
  cmd->add_option("--annotations", cfg.annotations, "Input annotation file")
      ->required();
}

void AddSpecOptions(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--model", cfg.model, "mlp, attention or moe");
  cmd->add_option("--strategy", cfg.strategy, "tp, sp or ep");
  cmd->add_option("--degree", cfg.degree, "Parallel degree");
  cmd->add_option("--layers", cfg.spec.layers, "Layer count");
  cmd->add_option("--hidden", cfg.spec.hidden, "Hidden size");
  cmd->add_option("--heads", cfg.spec.heads, "Attention heads");
  cmd->add_option("--seqlen", cfg.spec.seqlen, "Sequence length");
  cmd->add_option("--batch", cfg.spec.batch, "Batch size");
  cmd->add_option("--experts", cfg.spec.experts, "Experts (moe)");
}

int Main(int argc, char** argv) {
  CLI::App app{"Checks distributed tensor graphs against their baseline."};
  app.require_subcommand(1);
  CliConfig cfg;

  CLI::App* verify = app.add_subcommand("verify", "Verify a graph pair");
  AddPairOptions(verify, cfg);
  verify->add_option("--jobs", cfg.jobs, "Matcher threads (0: all cores)");
  verify->add_flag("--no-memo", cfg.no_memo, "Disable layer memoization");
  verify->add_flag("--no-parallel", cfg.no_parallel,
                   "Sequential matching (same as --jobs 1)");
  verify->add_flag("--no-partition", cfg.no_partition,
                   "Verify the whole graph as one layer");
  verify->add_flag("--keep-going", cfg.keep_going,
                   "Continue past the first failing layer (best effort)");
  verify->add_option("--rules", cfg.rules, "Rule catalog file");
  verify->add_option("--forms", cfg.forms, "Enabled forms: tp,sp,ep or all");
  verify->add_option("--dump-facts", cfg.dump_facts, "Write the fact dump");
  verify->add_option("--report", cfg.report, "Write the report");
  verify->add_option("--format", cfg.format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  verify->add_option("--max-iterations", cfg.max_iterations,
                     "Saturation iteration budget per layer");
  verify->add_option("--max-facts", cfg.max_facts, "Fact budget per layer");

  CLI::App* gen = app.add_subcommand("gen", "Generate a model pair");
  gen->add_option("--out", cfg.out, "Output directory")->required();
  gen->add_flag("--corpus", cfg.corpus,
                "Write the full corpus and corpus.manifest instead");
  AddSpecOptions(gen, cfg);

  CLI::App* inject = app.add_subcommand("inject", "Inject a bug");
  AddPairOptions(inject, cfg);
  inject->add_option("--category", cfg.category, "Bug category 1-5")
      ->check(CLI::Range(1, 5));
  inject->add_option("--site", cfg.site, "Distributed node id");
  inject->add_option("--mutation", cfg.mutation, "Mutation name");
  inject->add_option("--out", cfg.out, "Output directory");
  inject->add_flag("--list", cfg.list, "List applicable injections");

  CLI::App* explain =
      app.add_subcommand("explain-rules", "Describe catalog rules");
  explain->add_option("ids", cfg.rule_ids, "Rule ids (default: all)");
  explain->add_option("--forms", cfg.forms, "Enabled forms: tp,sp,ep or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (inject->parsed() && !cfg.list && cfg.out.empty()) {
    return Fail(absl::InvalidArgumentError("inject requires --out"));
  }
  if (verify->parsed()) return RunVerify(cfg);
  if (gen->parsed()) return RunGen(cfg);
  if (inject->parsed()) return RunInject(cfg);
  return RunExplain(cfg);
}

}  // namespace
}  // namespace graphcheck

int main(int argc, char** argv) { return graphcheck::Main(argc, argv); }
