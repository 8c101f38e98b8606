#include "smforge/strategies.hpp"

#include <algorithm>
#include <map>

#include "smforge/tables.hpp"
#include "smforge/umple.hpp"
#include "text_util.hpp"

namespace smforge {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kSinglePrompt: return "single_prompt";
    case Strategy::kStructureDriven: return "structure_driven";
    case Strategy::kEventDriven: return "event_driven";
    case Strategy::kHybrid: return "hybrid";
  }
  return "";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<std::string> fixed_steps(Strategy s) {
  switch (s) {
    case Strategy::kSinglePrompt: return {"baseline"};
    case Strategy::kStructureDriven: return {"S1", "S2", "S3", "S4", "S5", "S6"};
    case Strategy::kEventDriven: return {"E1", "E2", "E4", "E5", "E6"};
    case Strategy::kHybrid: return {"baseline", "S1", "S2", "S3", "S4", "S5", "S6"};
  }
  return {};
}

std::size_t GenerationConfig::effective_shots() const {
  if (shots) return *shots;
  return strategy == Strategy::kSinglePrompt ? 3 : 2;
}

// ---------------------------------------------------------------------------
// Few-shot examples

namespace {

constexpr std::string_view kExampleOpen = "### Example ";
constexpr std::string_view kExampleClose = "### End of example ";

std::string render_answer(const StateMachine& truth, ExampleFormat format) {
  if (format == ExampleFormat::kUmple) return "```umple\n" + emit_umple(truth) + "```";
  return emit_tables(truth);
}

}  // namespace

std::vector<ExampleBlock> build_fewshot(const std::vector<ExampleSource>& pool,
                                        std::string_view test_id, std::size_t n,
                                        ExampleFormat format, const TemplateSet& templates) {
  std::vector<const ExampleSource*> usable;
  for (const auto& p : pool) {
    if (p.id != test_id) usable.push_back(&p);
  }
  if (usable.size() < n) {
    throw InsufficientExamples("need " + std::to_string(n) + " examples but only " +
                               std::to_string(usable.size()) + " remain after excluding '" +
                               std::string(test_id) + "'");
  }
  std::vector<ExampleBlock> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = *usable[i];
    std::string text = templates.render(
        "common/example", {{"index", std::to_string(i + 1)},
                           {"description", std::string(text::trim(src.description))},
                           {"answer", render_answer(src.truth, format)}});
    while (!text.empty() && text::is_space(text.back())) text.pop_back();
    out.push_back({src.id, std::move(text)});
  }
  return out;
}

std::vector<std::string> extract_example_blocks(std::string_view prompt) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = prompt.find(kExampleOpen, pos)) != std::string_view::npos) {
    auto close = prompt.find(kExampleClose, pos);
    if (close == std::string_view::npos) {
      out.emplace_back(prompt.substr(pos));
      break;
    }
    auto eol = prompt.find('\n', close);
    if (eol == std::string_view::npos) eol = prompt.size();
    out.emplace_back(prompt.substr(pos, eol - pos));
    pos = eol;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step runner

namespace {

std::string tidy_prompt(std::string s) {
  std::string out;
  int newlines = 0;
  for (char c : s) {
    if (c == '\n') {
      if (++newlines > 2) continue;
    } else if (c != '\r') {
      newlines = 0;
    }
    out.push_back(c);
  }
  while (!out.empty() && text::is_space(out.back())) out.pop_back();
  while (!out.empty() && text::is_space(out.front())) out.erase(out.begin());
  return out;
}

std::vector<ExampleSource> select_pool(const RunInputs& in, const GenerationConfig& cfg) {
  if (cfg.example_pool.empty()) return in.pool;
  std::vector<ExampleSource> out;
  for (const auto& id : cfg.example_pool) {
    auto it = std::find_if(in.pool.begin(), in.pool.end(),
                           [&](const ExampleSource& e) { return e.id == id; });
    if (it != in.pool.end()) out.push_back(*it);
  }
  return out;
}

class Runner {
 public:
  Runner(const RunInputs& in, const GenerationConfig& cfg, Backend& backend)
      : in_(in),
        cfg_(cfg),
        builtin_(in.templates ? std::nullopt : std::optional<TemplateSet>(TemplateSet::builtin())),
        templates_(in.templates ? *in.templates : *builtin_),
        recorder_(BackendPtr(&backend, [](Backend*) {})) {
    pool_ = select_pool(in, cfg);
  }

  const TemplateSet& templates() const { return templates_; }

  std::string examples(ExampleFormat format, std::vector<ExampleBlock>* keep) {
    auto blocks = build_fewshot(pool_, in_.scenario_id, cfg_.effective_shots(), format, templates_);
    std::string joined;
    for (const auto& b : blocks) {
      if (!joined.empty()) joined += "\n\n";
      joined += b.text;
    }
    if (keep) keep->insert(keep->end(), blocks.begin(), blocks.end());
    if (blocks.empty()) return "";
    return templates_.render("common/examples_header", {{"examples", joined}});
  }

  std::map<std::string, std::string> base_values() const {
    return {{"description", std::string(text::trim(in_.description))},
            {"table_schema", std::string(text::trim(templates_.get("common/table_schema")))}};
  }

  double temperature(const std::string& step) const {
    return cfg_.sampling.temperature(cfg_.creative_steps.contains(step) ? Profile::kCreative
                                                                        : Profile::kDeterministic);
  }

  /// Sends one prompt; tags gateway errors with the step id.
  std::pair<CompletionResponse, double> call(const std::string& step, const std::string& prompt) {
    CompletionRequest req;
    req.model = cfg_.model;
    req.messages = {{Role::kUser, prompt}};
    req.temperature = temperature(step);
    req.max_tokens = cfg_.sampling.max_tokens;
    try {
      return {recorder_.complete(req), req.temperature};
    } catch (GatewayError& e) {
      e.set_step(step);
      throw;
    }
  }

  StepOutcome table_step(const std::string& step, const std::string& prompt) {
    auto [resp, temp] = call(step, prompt);
    StepOutcome out;
    out.step_id = step;
    out.raw_response = resp.content;
    out.parsed = parse_response_tables(resp.content);
    out.temperature_used = temp;
    out.truncated = resp.truncated();
    return out;
  }

  Transcript transcript() const {
    return {std::string(strategy_name(cfg_.strategy)), in_.scenario_id, recorder_.entries()};
  }

  const RunInputs& inputs() const { return in_; }

 private:
  const RunInputs& in_;
  const GenerationConfig& cfg_;
  std::optional<TemplateSet> builtin_;
  const TemplateSet& templates_;
  RecordingBackend recorder_;
  std::vector<ExampleSource> pool_;
};

std::string tables_or_placeholder(const PartialModel& p) {
  if (p.states_rows.empty() && p.transition_rows.empty() && p.structure_rows.empty() &&
      p.events.empty()) {
    return "(nothing yet)";
  }
  std::string out = emit_partial_tables(p);
  if (!p.events.empty()) out += "\n" + emit_events_table(p.events);
  return out;
}

std::string machine_name_for(const RunInputs& in) {
  std::string name = to_identifier(in.scenario_id);
  return name.empty() ? "sm" : name;
}

void finish_multistep(RunResult& result, MergeState merge, const RunInputs& in) {
  WarningLog& log = result.warnings;
  log.insert(log.end(), merge.warnings.begin(), merge.warnings.end());
  PartialModel clean = dedupe(merge.current, &log);
  result.machine = finalize(clean, machine_name_for(in), &log);
  result.merge = std::move(merge);
}

// Baseline single-prompt call shared by single_prompt and hybrid.
void run_baseline(Runner& r, RunResult& result) {
  auto values = r.base_values();
  values["examples"] = r.examples(ExampleFormat::kUmple, &result.examples);
  const std::string prompt = tidy_prompt(r.templates().render("single_prompt/baseline", values));
  auto [resp, temp] = r.call("baseline", prompt);

  StepOutcome out;
  out.step_id = "baseline";
  out.raw_response = resp.content;
  out.temperature_used = temp;
  out.truncated = resp.truncated();
  result.outcomes.push_back(out);
  result.baseline_text = resp.content;

  if (resp.truncated()) {
    result.warnings.push_back({"baseline", "-", "response truncated (finish=length)"});
  }
  UmpleDocument doc = parse_umple(resp.content, ParseMode::kLenient);
  for (const auto& d : doc.diagnostics) {
    result.warnings.push_back({"baseline", "umple", d.to_string()});
  }
  result.machine = doc.machine ? std::move(*doc.machine) : StateMachine{};
  if (result.machine.name.empty() || result.machine.name == "sm") {
    result.machine.name = machine_name_for(r.inputs());
  }
  require_valid(result.machine);
}

std::string extract_umple_block(const std::string& raw) {
  // Drop surrounding prose and fences; keep the draft as the model wrote it.
  const auto open = raw.find("```");
  if (open == std::string::npos) return std::string(text::trim(raw));
  auto body = raw.find('\n', open);
  if (body == std::string::npos) return std::string(text::trim(raw));
  const auto close = raw.find("```", body);
  return std::string(text::trim(raw.substr(body + 1, close == std::string::npos
                                                          ? std::string::npos
                                                          : close - body - 1)));
}

MergeState run_structure_steps(Runner& r, RunResult& result,
                               const std::optional<std::string>& draft) {
  MergeState merge;
  std::string examples = r.examples(ExampleFormat::kTables, &result.examples);
  std::string colleague;
  if (draft) {
    colleague = r.templates().render("hybrid/colleague", {{"baseline", *draft}});
  }
  for (const std::string step : {"S1", "S2", "S3", "S4", "S5", "S6"}) {
    auto values = r.base_values();
    values["examples"] = examples;
    values["tables"] = tables_or_placeholder(merge.current);
    std::string prompt = r.templates().render("structure_driven/" + step, values);
    if (draft) prompt = tidy_prompt(prompt) + "\n\n" + colleague;
    StepOutcome out = r.table_step(step, tidy_prompt(prompt));
    merge = merge_step(std::move(merge), out);
    result.outcomes.push_back(std::move(out));
  }
  return merge;
}

}  // namespace

// ---------------------------------------------------------------------------
// Strategies

RunResult run_single_prompt(const RunInputs& in, const GenerationConfig& config, Backend& backend) {
  if (config.strategy != Strategy::kSinglePrompt) {
    throw std::invalid_argument("run_single_prompt needs strategy single_prompt");
  }
  Runner r(in, config, backend);
  RunResult result;
  run_baseline(r, result);
  result.transcript = r.transcript();
  return result;
}

RunResult run_structure_driven(const RunInputs& in, const GenerationConfig& config,
                               Backend& backend) {
  if (config.strategy != Strategy::kStructureDriven) {
    throw std::invalid_argument("run_structure_driven needs strategy structure_driven");
  }
  Runner r(in, config, backend);
  RunResult result;
  MergeState merge = run_structure_steps(r, result, std::nullopt);
  result.transcript = r.transcript();
  finish_multistep(result, std::move(merge), in);
  return result;
}

RunResult run_event_driven(const RunInputs& in, const GenerationConfig& config, Backend& backend) {
  if (config.strategy != Strategy::kEventDriven) {
    throw std::invalid_argument("run_event_driven needs strategy event_driven");
  }
  Runner r(in, config, backend);
  RunResult result;
  MergeState merge;
  const std::string examples = r.examples(ExampleFormat::kTables, &result.examples);

  auto run_step = [&](const std::string& step, const std::string& tpl,
                      std::map<std::string, std::string> extra = {}) {
    auto values = r.base_values();
    values["examples"] = examples;
    values["tables"] = tables_or_placeholder(merge.current);
    values.merge(extra);
    StepOutcome out = r.table_step(step, tidy_prompt(r.templates().render(tpl, values)));
    merge = merge_step(std::move(merge), out);
    result.outcomes.push_back(std::move(out));
  };

  run_step("E1", "event_driven/E1");
  run_step("E2", "event_driven/E2");

  std::vector<std::string> events;
  std::set<std::string> seen;
  for (const auto& e : merge.current.events) {
    const std::string key = try_normalize_name(e);
    if (key.empty() || !seen.insert(key).second) continue;
    events.push_back(std::string(text::trim(e)));
  }
  if (events.empty()) {
    merge.warnings.push_back({"E2", "events", "no events listed; per-event steps skipped"});
  }
  for (const auto& ev : events) {
    const std::string step = "E3:" + ev;
    try {
      run_step(step, "event_driven/E3", {{"event", ev}});
    } catch (const AuthError&) {
      throw;
    } catch (const GatewayError& e) {
      merge.warnings.push_back({step, "transitions", std::string("call failed; event skipped: ") + e.what()});
    }
  }

  run_step("E4", "event_driven/E4");
  run_step("E5", "event_driven/E5");
  run_step("E6", "event_driven/E6");

  result.transcript = r.transcript();
  finish_multistep(result, std::move(merge), in);
  return result;
}

RunResult run_hybrid(const RunInputs& in, const GenerationConfig& config, Backend& backend) {
  if (config.strategy != Strategy::kHybrid) {
    throw std::invalid_argument("run_hybrid needs strategy hybrid");
  }
  // The baseline call takes the single-prompt shot count unless overridden.
  GenerationConfig base_cfg = config;
  base_cfg.strategy = Strategy::kSinglePrompt;
  Runner base(in, base_cfg, backend);
  RunResult result;
  run_baseline(base, result);
  const std::string draft = extract_umple_block(result.baseline_text);

  Runner r(in, config, backend);
  MergeState merge = run_structure_steps(r, result, draft);

  Transcript t = base.transcript();
  auto rest = r.transcript();
  t.strategy_id = std::string(strategy_name(Strategy::kHybrid));
  t.entries.insert(t.entries.end(), rest.entries.begin(), rest.entries.end());
  result.transcript = std::move(t);
  finish_multistep(result, std::move(merge), in);
  return result;
}

RunResult run_strategy(const RunInputs& in, const GenerationConfig& config, Backend& backend) {
  switch (config.strategy) {
    case Strategy::kSinglePrompt: return run_single_prompt(in, config, backend);
    case Strategy::kStructureDriven: return run_structure_driven(in, config, backend);
    case Strategy::kEventDriven: return run_event_driven(in, config, backend);
    case Strategy::kHybrid: return run_hybrid(in, config, backend);
  }
  throw std::invalid_argument("unknown strategy");
}

}  // namespace smforge
