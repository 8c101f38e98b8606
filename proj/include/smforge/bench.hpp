#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smforge/corpus.hpp"
#include "smforge/evaluator.hpp"
#include "smforge/gateway.hpp"
#include "smforge/strategies.hpp"

namespace smforge {

struct BenchConfig {
  std::vector<Strategy> strategies;
  std::string model;
  std::optional<std::size_t> shots;
  SamplingConfig sampling;
  AverageMode average = AverageMode::kMacro;
  std::size_t jobs = 1;
  /// Backend for one (strategy, scenario) run. Called from worker threads.
  std::function<BackendPtr(Strategy, const Scenario&)> backend_for;
  const TemplateSet* templates = nullptr;
};

struct ScenarioRun {
  Strategy strategy = Strategy::kSinglePrompt;
  std::string scenario_id;
  bool ok = false;
  std::string error;  // set when !ok
  StateMachine machine;
  Transcript transcript;
  WarningLog warnings;
  std::optional<MatchSets> sets;
  std::optional<EvalReport> report;
};

struct BenchResult {
  std::vector<ScenarioRun> runs;  // strategy-major, scenarios in corpus order
  std::map<Strategy, EvalReport> summaries;
  AverageMode average = AverageMode::kMacro;

  bool any_failed() const;
};

/// Runs the strategy x scenario grid. Failed runs are kept with their error
/// and left out of the summaries; AuthError aborts the whole bench.
BenchResult run_bench(const std::vector<Scenario>& corpus, const BenchConfig& config);

/// Writes summary.md, summary.json and per-run files under `out`:
/// <strategy>/<scenario>.json, .ump and .warnings.txt.
void write_bench_reports(const BenchResult& result, const std::filesystem::path& out);

/// Text of summary.md.
std::string bench_summary_markdown(const BenchResult& result);

}  // namespace smforge
