#pragma once

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smforge/diagnostics.hpp"
#include "smforge/gateway.hpp"
#include "smforge/ir.hpp"
#include "smforge/postprocessor.hpp"
#include "smforge/templates.hpp"

namespace smforge {

enum class Strategy { kSinglePrompt, kStructureDriven, kEventDriven, kHybrid };

inline constexpr std::array kAllStrategies = {Strategy::kSinglePrompt, Strategy::kStructureDriven,
                                              Strategy::kEventDriven, Strategy::kHybrid};

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);

/// Fixed step ids in execution order. Event-driven runs insert one
/// "E3:<event>" step per listed event between E2 and E4.
std::vector<std::string> fixed_steps(Strategy s);

struct GenerationConfig {
  Strategy strategy = Strategy::kSinglePrompt;
  std::string model;
  /// Unset: 3 for single_prompt, 2 for the multi-step strategies.
  std::optional<std::size_t> shots;
  std::vector<std::string> example_pool;
  std::set<std::string> creative_steps{"S1", "E1"};
  SamplingConfig sampling;

  std::size_t effective_shots() const;
};

/// A pool member as seen by prompt construction.
struct ExampleSource {
  std::string id;
  std::string description;
  StateMachine truth;
};

enum class ExampleFormat { kUmple, kTables };

/// Rendered few-shot example. `scenario_id` is for auditing only and never
/// appears in `text`.
struct ExampleBlock {
  std::string scenario_id;
  std::string text;
};

class InsufficientExamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Drops `test_id` from the pool and renders the first `n` remaining
/// entries in pool order.
std::vector<ExampleBlock> build_fewshot(const std::vector<ExampleSource>& pool,
                                        std::string_view test_id, std::size_t n,
                                        ExampleFormat format,
                                        const TemplateSet& templates = TemplateSet::builtin());

/// Few-shot blocks found in a prompt, split on the example markers.
std::vector<std::string> extract_example_blocks(std::string_view prompt);

struct RunInputs {
  std::string scenario_id;
  std::string description;
  /// Candidate examples, in pool order. Members not named in
  /// GenerationConfig::example_pool are ignored.
  std::vector<ExampleSource> pool;
  /// Null: built-in templates.
  const TemplateSet* templates = nullptr;
};

struct RunResult {
  StateMachine machine;
  Transcript transcript;
  std::vector<StepOutcome> outcomes;
  WarningLog warnings;
  /// Raw baseline answer (single_prompt and hybrid).
  std::string baseline_text;
  std::vector<ExampleBlock> examples;
  /// Accumulated rows before finalize (multi-step strategies).
  std::optional<MergeState> merge;
};

// Gateway errors propagate unchanged with GatewayError::step() set.
RunResult run_single_prompt(const RunInputs& in, const GenerationConfig& config, Backend& backend);
RunResult run_structure_driven(const RunInputs& in, const GenerationConfig& config,
                               Backend& backend);
RunResult run_event_driven(const RunInputs& in, const GenerationConfig& config, Backend& backend);
RunResult run_hybrid(const RunInputs& in, const GenerationConfig& config, Backend& backend);

/// Dispatches on config.strategy.
RunResult run_strategy(const RunInputs& in, const GenerationConfig& config, Backend& backend);

}  // namespace smforge
