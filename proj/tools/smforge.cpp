// smforge command-line tool: generate, evaluate, bench.
//
// Exit codes: 0 ok, 1 pipeline failure, 2 usage, 3 gateway/auth.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "smforge/bench.hpp"
#include "smforge/corpus.hpp"
#include "smforge/evaluator.hpp"
#include "smforge/gateway.hpp"
#include "smforge/postprocessor.hpp"
#include "smforge/report.hpp"
#include "smforge/strategies.hpp"
#include "smforge/tables.hpp"
#include "smforge/umple.hpp"

namespace fs = std::filesystem;
using namespace smforge;

namespace {

constexpr int kOk = 0;
constexpr int kPipelineFailure = 1;
constexpr int kUsage = 2;
constexpr int kGateway = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // shared
  std::string corpus = "corpus/mini";
  std::string templates;
  std::string model;
  std::string provider = "openai";
  std::optional<std::size_t> shots;
  std::optional<double> temp_deterministic;
  std::optional<double> temp_creative;
  int max_tokens = kDefaultMaxTokens;
  std::string sampling_file;
  std::string out;
  // generate / evaluate
  std::string strategy;
  std::string scenario;
  std::string record;
  std::string replay;
  std::string format = "umple";
  std::string generated;
  std::string truth;
  // bench
  std::vector<std::string> strategies;
  std::string avg = "macro";
  std::size_t jobs = 1;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

Strategy parse_strategy(const std::string& name) {
  auto s = strategy_from_name(name);
  if (!s) {
    throw UsageError("unknown strategy '" + name +
                     "' (expected single_prompt, structure_driven, event_driven or hybrid)");
  }
  return *s;
}

SamplingConfig sampling_from(const Options& o) {
  SamplingConfig cfg;
  try {
    if (!o.sampling_file.empty()) cfg.apply_overrides_file(o.sampling_file);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.temp_deterministic) cfg.deterministic = *o.temp_deterministic;
  if (o.temp_creative) cfg.creative = *o.temp_creative;
  cfg.max_tokens = o.max_tokens;
  return cfg;
}

std::optional<TemplateSet> templates_from(const Options& o) {
  if (o.templates.empty()) return std::nullopt;
  return TemplateSet::with_overrides(o.templates);
}

std::vector<Scenario> load_pool_corpus(const Options& o) {
  if (!fs::is_directory(o.corpus)) throw UsageError("corpus directory not found: " + o.corpus);
  return load_corpus(o.corpus);
}

// --scenario is a scenario directory or the id of one in --corpus.
Scenario resolve_scenario(const Options& o, const std::vector<Scenario>& corpus) {
  if (o.scenario.empty()) throw UsageError("--scenario is required");
  if (fs::exists(fs::path(o.scenario) / "model.ump")) return load_scenario(o.scenario);
  for (const auto& s : corpus) {
    if (s.id == o.scenario) return s;
  }
  throw UsageError("no scenario '" + o.scenario + "' in " + o.corpus);
}

// Model recorded with a replay bundle, if any.
std::string manifest_model(const fs::path& replay) {
  const fs::path dir = fs::is_directory(replay) ? replay : replay.parent_path();
  for (const fs::path& p : {dir / "manifest.json", dir.parent_path() / "manifest.json"}) {
    if (!fs::exists(p)) continue;
    auto j = nlohmann::json::parse(read_text(p), nullptr, false);
    if (j.is_object() && j.contains("model")) return j["model"].get<std::string>();
  }
  return "";
}

fs::path replay_file(const fs::path& replay, Strategy st, const std::string& scenario_id) {
  if (fs::is_regular_file(replay)) return replay;
  for (const fs::path& p : {replay / std::string(strategy_name(st)) / (scenario_id + ".jsonl"),
                            replay / (scenario_id + ".jsonl")}) {
    if (fs::exists(p)) return p;
  }
  throw ReplayMiss("no transcript for " + std::string(strategy_name(st)) + "/" + scenario_id +
                   " under " + replay.string());
}

BackendPtr live_backend(const Options& o) {
  auto provider = provider_from_name(o.provider);
  if (!provider) throw UsageError("unknown provider '" + o.provider + "'");
  return std::make_shared<HttpBackend>(live_config_from_env(*provider));
}

std::string resolve_model(const Options& o) {
  if (!o.model.empty()) return o.model;
  if (!o.replay.empty()) {
    if (auto m = manifest_model(o.replay); !m.empty()) return m;
  }
  throw UsageError("--model is required");
}

void print_warnings(const WarningLog& log) {
  for (const auto& w : log) std::cerr << w.to_string() << "\n";
}

// ---------------------------------------------------------------------------

int cmd_generate(const Options& o) {
  const Strategy st = parse_strategy(o.strategy);
  if (o.format != "umple" && o.format != "tables" && o.format != "both") {
    throw UsageError("--format must be umple, tables or both");
  }
  const auto corpus = load_pool_corpus(o);
  const Scenario scenario = resolve_scenario(o, corpus);
  const auto templates = templates_from(o);

  GenerationConfig cfg;
  cfg.strategy = st;
  cfg.model = resolve_model(o);
  cfg.shots = o.shots;
  cfg.example_pool = example_pool(corpus);
  cfg.sampling = sampling_from(o);

  RunInputs in{scenario.id, scenario.description, to_examples(corpus),
               templates ? &*templates : nullptr};

  BackendPtr backend = o.replay.empty()
                           ? live_backend(o)
                           : ReplayBackend::from_file(replay_file(o.replay, st, scenario.id));
  if (!o.record.empty()) backend = record_wrap(backend, o.record);

  RunResult r = run_strategy(in, cfg, *backend);
  print_warnings(r.warnings);

  const std::string stem = scenario.id + "." + std::string(strategy_name(st));
  auto emit = [&](const std::string& ext, const std::string& text) {
    if (o.out.empty()) {
      std::cout << text;
    } else {
      write_text(fs::path(o.out) / (stem + ext), text);
    }
  };
  if (o.format == "umple" || o.format == "both") {
    try {
      emit(".ump", emit_umple(r.machine));
    } catch (const EmitError& e) {
      std::cerr << "WARN emit umple " << e.what() << "; writing tables instead\n";
      emit(".html", emit_tables(r.machine));
    }
  }
  if (o.format == "tables" || o.format == "both") emit(".html", emit_tables(r.machine));
  if (!o.out.empty()) {
    std::string warn;
    for (const auto& w : r.warnings) warn += w.to_string() + "\n";
    write_text(fs::path(o.out) / (stem + ".warnings.txt"), warn);
  }
  return kOk;
}

StateMachine load_model_file(const fs::path& p) {
  const std::string text = read_text(p);
  if (p.extension() == ".html" || p.extension() == ".htm") {
    WarningLog log;
    auto parsed = parse_response_tables(text);
    auto sm = finalize(dedupe(parsed.model, &log), p.stem().string(), &log);
    print_warnings(log);
    return sm;
  }
  return std::move(*parse_umple(text, ParseMode::kStrict).machine);
}

int cmd_evaluate(const Options& o) {
  if (o.generated.empty()) throw UsageError("--generated is required");
  StateMachine truth;
  AliasMap aliases;
  std::string id;
  if (!o.truth.empty()) {
    truth = load_model_file(o.truth);
    id = fs::path(o.truth).stem().string();
  } else {
    std::vector<Scenario> corpus;
    if (!fs::exists(fs::path(o.scenario) / "model.ump")) corpus = load_pool_corpus(o);
    Scenario s = resolve_scenario(o, corpus);
    truth = s.truth;
    aliases = s.aliases;
    id = s.id;
  }
  const StateMachine gen = load_model_file(o.generated);
  const MatchSets sets = evaluate(gen, truth, aliases);
  const EvalReport report = score(sets);
  std::cout << markdown_metrics_table(report, AverageMode::kMacro);
  if (!o.out.empty()) {
    write_text(fs::path(o.out) / (id + ".evaluation.json"),
               scenario_record(id, o.strategy.empty() ? "-" : o.strategy, sets, report, {})
                       .dump(2) +
                   "\n");
  }
  return kOk;
}

int cmd_bench(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  const auto corpus = load_pool_corpus(o);
  if (corpus.empty()) throw UsageError("corpus " + o.corpus + " holds no scenarios");
  if (o.avg != "macro" && o.avg != "pooled") throw UsageError("--avg must be macro or pooled");

  const auto templates = templates_from(o);
  BenchConfig cfg;
  if (o.strategies.empty()) {
    cfg.strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
  } else {
    for (const auto& s : o.strategies) cfg.strategies.push_back(parse_strategy(s));
  }
  cfg.model = resolve_model(o);
  cfg.shots = o.shots;
  cfg.sampling = sampling_from(o);
  cfg.average = o.avg == "macro" ? AverageMode::kMacro : AverageMode::kPooled;
  cfg.jobs = std::max<std::size_t>(1, o.jobs);
  cfg.templates = templates ? &*templates : nullptr;

  BackendPtr live;
  if (o.replay.empty()) live = live_backend(o);
  const fs::path replay = o.replay;
  const fs::path record = o.record;
  cfg.backend_for = [&](Strategy st, const Scenario& s) -> BackendPtr {
    BackendPtr b = live ? live : ReplayBackend::from_file(replay_file(replay, st, s.id));
    if (!record.empty()) {
      b = record_wrap(b, record / std::string(strategy_name(st)) / (s.id + ".jsonl"));
    }
    return b;
  };

  BenchResult result = run_bench(corpus, cfg);
  write_bench_reports(result, o.out);
  std::cout << bench_summary_markdown(result);
  if (result.any_failed()) {
    std::size_t n = 0;
    for (const auto& r : result.runs) n += r.ok ? 0 : 1;
    std::cerr << "WARN bench - " << n << " run(s) failed and were excluded from the averages\n";
  }
  return kOk;
}

void add_shared(CLI::App* cmd, Options& o) {
  cmd->add_option("--corpus", o.corpus, "Scenario corpus directory (example pool)");
  cmd->add_option("--templates", o.templates, "Directory overriding prompt templates");
  cmd->add_option("--model", o.model, "Model name sent to the provider");
  cmd->add_option("--provider", o.provider, "openai or anthropic")
      ->check(CLI::IsMember({"openai", "anthropic"}));
  cmd->add_option("--shots", o.shots, "Few-shot examples per prompt");
  cmd->add_option("--temp-deterministic", o.temp_deterministic, "Temperature of most steps");
  cmd->add_option("--temp-creative", o.temp_creative, "Temperature of S1 and E1");
  cmd->add_option("--max-tokens", o.max_tokens, "Response token limit")->check(CLI::PositiveNumber);
  cmd->add_option("--sampling", o.sampling_file, "File with key = value sampling overrides");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--record", o.record, "Record transcripts to this path");
  cmd->add_option("--replay", o.replay, "Replay transcripts from this file or bundle");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State machine generation and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "Generate a state machine for one scenario");
  add_shared(gen, o);
  gen->add_option("--strategy", o.strategy, "single_prompt, structure_driven, event_driven, hybrid")
      ->required();
  gen->add_option("--scenario", o.scenario, "Scenario directory or id in --corpus")->required();
  gen->add_option("--format", o.format, "umple, tables or both");

  auto* ev = app.add_subcommand("evaluate", "Score a generated model against the ground truth");
  ev->add_option("--corpus", o.corpus, "Scenario corpus directory");
  ev->add_option("--scenario", o.scenario, "Scenario directory or id (truth and aliases)");
  ev->add_option("--truth", o.truth, "Ground-truth model file instead of a scenario");
  ev->add_option("--generated", o.generated, "Generated model (.ump or .html tables)")->required();
  ev->add_option("--strategy", o.strategy, "Strategy label for the report");
  ev->add_option("--out", o.out, "Directory for the JSON report");

  auto* bench = app.add_subcommand("bench", "Run the strategy x scenario grid");
  add_shared(bench, o);
  bench->add_option("--strategy", o.strategies, "Strategy to run (repeatable; default all)");
  bench->add_option("--avg", o.avg, "macro or pooled");
  bench->add_option("--jobs", o.jobs, "Concurrent scenario runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*ev) return cmd_evaluate(o);
    if (*bench) return cmd_bench(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GatewayError& e) {
    std::cerr << "gateway error" << (e.step().empty() ? "" : " in step " + e.step()) << ": "
              << e.what() << "\n";
    return kGateway;
  } catch (const ParseFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d.to_string() << "\n";
    return kPipelineFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPipelineFailure;
  }
  return kUsage;
}
