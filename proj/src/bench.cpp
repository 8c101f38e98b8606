#include "smforge/bench.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "smforge/report.hpp"
#include "smforge/tables.hpp"
#include "smforge/umple.hpp"

namespace smforge {

bool BenchResult::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const ScenarioRun& r) { return !r.ok; });
}

namespace {

void run_one(const Scenario& s, const std::vector<ExampleSource>& pool,
             const std::vector<std::string>& pool_ids, const BenchConfig& cfg, ScenarioRun& run) {
  GenerationConfig gen;
  gen.strategy = run.strategy;
  gen.model = cfg.model;
  gen.shots = cfg.shots;
  gen.example_pool = pool_ids;
  gen.sampling = cfg.sampling;

  RunInputs in;
  in.scenario_id = s.id;
  in.description = s.description;
  in.pool = pool;
  in.templates = cfg.templates;

  try {
    BackendPtr backend = cfg.backend_for(run.strategy, s);
    RunResult r = run_strategy(in, gen, *backend);
    run.machine = std::move(r.machine);
    run.transcript = std::move(r.transcript);
    run.warnings = std::move(r.warnings);
    run.sets = evaluate(run.machine, s.truth, s.aliases);
    run.report = score(*run.sets);
    run.ok = true;
  } catch (const AuthError&) {
    throw;
  } catch (const GatewayError& e) {
    run.error = e.step().empty() ? e.what() : "step " + e.step() + ": " + e.what();
  } catch (const std::exception& e) {
    run.error = e.what();
  }
}

}  // namespace

BenchResult run_bench(const std::vector<Scenario>& corpus, const BenchConfig& config) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (!config.backend_for) throw std::invalid_argument("bench needs a backend factory");

  const auto pool_ids = example_pool(corpus);
  const auto pool = to_examples(corpus);

  BenchResult result;
  result.average = config.average;
  for (Strategy st : config.strategies) {
    for (const auto& s : corpus) {
      ScenarioRun run;
      run.strategy = st;
      run.scenario_id = s.id;
      result.runs.push_back(std::move(run));
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.runs.size()) return;
      {
        std::lock_guard lock(fatal_mu);
        if (fatal) return;
      }
      try {
        run_one(corpus[i % corpus.size()], pool, pool_ids, config, result.runs[i]);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, result.runs.size()));
  std::vector<std::thread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);

  for (Strategy st : config.strategies) {
    std::vector<EvalReport> reports;
    std::vector<MatchSets> sets;
    for (const auto& r : result.runs) {
      if (r.strategy != st || !r.ok) continue;
      reports.push_back(*r.report);
      sets.push_back(*r.sets);
    }
    if (reports.empty()) continue;
    result.summaries[st] = config.average == AverageMode::kMacro ? macro_average(reports)
                                                                 : pooled_average(sets);
  }
  return result;
}

std::string bench_summary_markdown(const BenchResult& result) {
  std::vector<std::pair<std::string, EvalReport>> cols;
  for (const auto& [st, rep] : result.summaries) cols.emplace_back(std::string(strategy_name(st)), rep);

  std::string out = "# Benchmark summary\n\n";
  out += "## F1 by component\n\n" + markdown_f1_comparison(cols, result.average);
  out += "\n## Overall precision, recall and F1\n\n" + markdown_overall_table(cols, result.average);

  std::string excluded;
  for (const auto& r : result.runs) {
    if (r.ok) continue;
    excluded += "- " + std::string(strategy_name(r.strategy)) + " / " + r.scenario_id + ": " +
                r.error + "\n";
  }
  if (!excluded.empty()) out += "\n## Excluded runs\n\n" + excluded;
  return out;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

void write_bench_reports(const BenchResult& result, const std::filesystem::path& out) {
  write_text(out / "summary.md", bench_summary_markdown(result));

  nlohmann::json summary = {{"averaging", average_mode_name(result.average)}};
  nlohmann::json strategies = nlohmann::json::object();
  for (const auto& [st, rep] : result.summaries) {
    strategies[std::string(strategy_name(st))] = metrics_json(rep);
  }
  summary["strategies"] = strategies;
  nlohmann::json excluded = nlohmann::json::array();

  for (const auto& r : result.runs) {
    const auto dir = out / std::string(strategy_name(r.strategy));
    std::string warn;
    for (const auto& w : r.warnings) warn += w.to_string() + "\n";
    write_text(dir / (r.scenario_id + ".warnings.txt"), warn);
    if (!r.ok) {
      excluded.push_back({{"strategy", strategy_name(r.strategy)},
                          {"scenario", r.scenario_id},
                          {"error", r.error}});
      continue;
    }
    write_text(dir / (r.scenario_id + ".json"),
               scenario_record(r.scenario_id, strategy_name(r.strategy), *r.sets, *r.report,
                               r.warnings)
                       .dump(2) +
                   "\n");
    try {
      write_text(dir / (r.scenario_id + ".ump"), emit_umple(r.machine));
    } catch (const EmitError&) {
      write_text(dir / (r.scenario_id + ".html"), emit_tables(r.machine));
    }
  }
  summary["excluded"] = excluded;
  write_text(out / "summary.json", summary.dump(2) + "\n");
}

}  // namespace smforge
