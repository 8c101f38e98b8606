// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sys/wait.h>
#include <sstream>

#include "smforge/corpus.hpp"
#include "smforge/evaluator.hpp"
#include "smforge/gateway.hpp"
#include "smforge/postprocessor.hpp"
#include "smforge/strategies.hpp"
#include "smforge/tables.hpp"
#include "smforge/umple.hpp"
#include "support/random_machines.hpp"

namespace fs = std::filesystem;
using namespace smforge;

namespace {

const fs::path kRoot = SMFORGE_SOURCE_DIR;
const fs::path kCli = SMFORGE_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(prec);
  ss << v;
  return ss.str();
}

std::vector<Scenario> all_scenarios() {
  auto out = load_corpus(kRoot / "corpus" / "mini");
  const fs::path imported = kRoot / "corpus" / "imported";
  if (fs::is_directory(imported)) {
    for (auto& s : load_corpus(imported)) out.push_back(std::move(s));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Transcripts of the replay bundle: (strategy, scenario id, path).
struct BundleItem {
  Strategy strategy;
  std::string scenario_id;
  fs::path path;
};

std::vector<BundleItem> replay_bundle() {
  std::vector<BundleItem> out;
  const fs::path root = kRoot / "fixtures" / "replay";
  for (Strategy st : kAllStrategies) {
    const fs::path dir = root / std::string(strategy_name(st));
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back({st, f.stem().string(), f});
  }
  return out;
}

// Step label of each call, from the call position alone.
std::vector<std::string> expected_steps(Strategy st, std::size_t calls) {
  switch (st) {
    case Strategy::kSinglePrompt: return {"baseline"};
    case Strategy::kStructureDriven: return {"S1", "S2", "S3", "S4", "S5", "S6"};
    case Strategy::kHybrid: return {"baseline", "S1", "S2", "S3", "S4", "S5", "S6"};
    case Strategy::kEventDriven: {
      std::vector<std::string> s{"E1", "E2"};
      for (std::size_t i = 5; i < calls; ++i) s.push_back("E3");
      for (const char* x : {"E4", "E5", "E6"}) s.push_back(x);
      return s;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

Outcome corpus_integrity() {
  const auto t0 = Clock::now();
  auto scenarios = all_scenarios();
  std::size_t imported = 0;
  std::string bad;
  for (const auto& s : scenarios) {
    auto v = verify_counts(s);
    if (!v.ok()) bad += " " + s.id + "(" + v.detail() + ")";
    if (auto ref = verify_reference(s)) {
      ++imported;
      if (!ref->ok()) bad += " " + s.id + " vs published counts (" + ref->detail() + ")";
    }
  }
  const auto printer = reference_counts("printer");
  const bool printer_ok = printer && *printer == ComponentCounts{6, 17, 6, 3, 2, 0, 1};
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = bad.empty() && printer_ok && secs < 1.0 && !scenarios.empty();
  o.detail = std::to_string(scenarios.size()) + " scenarios, " + std::to_string(imported) +
             " imported; printer reference " + (printer ? to_string(*printer) : "missing") +
             "; " + fmt(secs, 3) + "s" + (bad.empty() ? "" : "; mismatches:" + bad);
  return o;
}

Outcome round_trips() {
  const auto t0 = Clock::now();
  auto scenarios = all_scenarios();
  std::string bad;
  for (const auto& s : scenarios) {
    auto doc = parse_umple(emit_umple(s.truth), ParseMode::kStrict);
    if (!equivalent(*doc.machine, s.truth)) {
      bad += " umple:" + s.id + "(" + describe_difference(*doc.machine, s.truth) + ")";
    }
    auto parsed = parse_response_tables(emit_tables(s.truth));
    auto rebuilt = finalize(parsed.model, s.truth.name);
    if (!equivalent(rebuilt, s.truth)) {
      bad += " tables:" + s.id + "(" + describe_difference(rebuilt, s.truth) + ")";
    }
  }
  const double secs = seconds_since(t0);
  return {bad.empty() && secs < 1.0,
          std::to_string(scenarios.size()) + " models x 2 formats; " + fmt(secs, 3) + "s" + bad};
}

Outcome evaluator_identity() {
  std::string bad;
  std::size_t checked = 0;
  for (const auto& s : all_scenarios()) {
    auto r = score(evaluate(s.truth, s.truth));
    for (Component c : kAllComponents) {
      if (!r[c]) continue;
      ++checked;
      if (r[c]->precision != 1.0 || r[c]->recall != 1.0 || r[c]->f1 != 1.0) {
        bad += " " + s.id + "/" + std::string(component_key(c));
      }
    }
    if (!r.aggregate || r.aggregate->f1 != 1.0 || r.aggregate->precision != 1.0 ||
        r.aggregate->recall != 1.0) {
      bad += " " + s.id + "/all";
    }
  }
  return {bad.empty(), std::to_string(checked) + " component scores exactly 1" + bad};
}

Outcome metric_conventions() {
  constexpr double kTol = 1e-4;
  // Arithmetic oracle.
  const double p = 3.0 / 4.0, r = 3.0 / 5.0, f = 2 * p * r / (p + r);
  auto m = score_counts({3, 1, 2});
  bool ok = m && std::abs(m->precision - 0.75) < kTol && std::abs(m->recall - 0.6) < kTol &&
            std::abs(m->f1 - 0.6667) < kTol && std::abs(m->f1 - f) < 1e-12;
  ok = ok && !score_counts({0, 0, 0}).has_value();

  auto report = [](double pp, double rr) {
    EvalReport e;
    e.aggregate = Metrics{pp, rr, 2 * pp * rr / (pp + rr)};
    return e;
  };
  auto avg = macro_average({report(0.8, 0.9), report(0.8, 0.5)});
  const double mean_f1 = (2 * 0.8 * 0.9 / 1.7 + 2 * 0.8 * 0.5 / 1.3) / 2;
  const double harmonic = 2 * 0.8 * 0.7 / 1.5;
  ok = ok && std::abs(avg.aggregate->f1 - mean_f1) < kTol && std::abs(avg.aggregate->f1 - 0.731) < 1e-3 &&
       std::abs(harmonic - 0.747) < 1e-3 && std::abs(avg.aggregate->f1 - harmonic) > kTol;
  return {ok, "score(3,1,2)=(" + fmt(m->precision) + ", " + fmt(m->recall) + ", " + fmt(m->f1) +
                  "); macro F1 " + fmt(avg.aggregate->f1) + " vs harmonic " + fmt(harmonic)};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937 rng(20240521);
  testkit::RandomSpec spec;
  spec.max_states = 6;
  spec.max_transitions = 8;
  std::size_t pairs = 0;
  std::string bad;
  for (; pairs < 300; ++pairs) {
    auto truth = testkit::random_machine(rng, spec);
    auto gen = testkit::mutate(truth, rng, spec);
    if (component_counts(gen).states > 6 || gen.transitions.size() > 8) {
      gen = testkit::random_machine(rng, spec);
    }
    auto sets = evaluate(gen, truth);
    auto oracle = testkit::brute_force_dependents(gen, truth);
    if (sets[Component::kTransitions].tp != oracle.transitions ||
        sets[Component::kGuards].tp != oracle.guards ||
        sets[Component::kActions].tp != oracle.actions) {
      bad += " pair" + std::to_string(pairs);
    }
  }
  const double secs = seconds_since(t0);
  return {bad.empty() && secs < 30.0,
          std::to_string(pairs) + " pairs agree with exhaustive search; " + fmt(secs, 2) + "s" + bad};
}

Outcome fp_propagation() {
  auto truth = *parse_umple("class M { sm {\n A { go -> B; }\n B {}\n} }", ParseMode::kStrict).machine;
  auto gen = *parse_umple(
                  "class M { sm {\n A { go -> B; fail [broken] / { log; alarm; } -> Ghost; }\n"
                  " B {}\n Ghost {}\n} }",
                  ParseMode::kStrict)
                  .machine;
  auto base = evaluate(truth, truth);
  auto sets = evaluate(gen, truth);
  auto delta = [&](Component c) { return sets[c].fp - base[c].fp; };
  const bool ok = delta(Component::kTransitions) == 1 && delta(Component::kGuards) == 1 &&
                  delta(Component::kActions) == 2 && sets[Component::kStates].fp == 1;
  return {ok, "fp += transitions " + std::to_string(delta(Component::kTransitions)) + ", guards " +
                  std::to_string(delta(Component::kGuards)) + ", actions " +
                  std::to_string(delta(Component::kActions))};
}

std::multiset<std::string> action_multiset(const std::vector<TransitionRow>& rows) {
  std::multiset<std::string> out;
  for (const auto& t : rows) {
    for (const auto& a : t.actions) out.insert(canonical_annotation(a));
  }
  return out;
}

Outcome fallback_rule() {
  const auto corpus = load_corpus(kRoot / "corpus" / "mini");
  const fs::path dir = kRoot / "fixtures" / "corrupt_s4" / "structure_driven";
  std::size_t runs = 0;
  std::string bad;
  for (const auto& s : corpus) {
    const fs::path file = dir / (s.id + ".jsonl");
    if (!fs::exists(file)) continue;
    ++runs;
    GenerationConfig cfg;
    cfg.strategy = Strategy::kStructureDriven;
    cfg.model = "fixture-model";
    cfg.example_pool = example_pool(corpus);
    RunInputs in{s.id, s.description, to_examples(corpus), nullptr};
    auto backend = ReplayBackend::from_file(file);
    RunResult r = run_strategy(in, cfg, *backend);

    const auto& snaps = r.merge->snapshots;
    const auto& order = r.merge->order;
    const auto s4 = std::find(order.begin(), order.end(), "S4");
    if (s4 == order.end() || s4 == order.begin()) {
      bad += " " + s.id + "(no S4)";
      continue;
    }
    const auto& last_good = snaps.at(*(s4 - 1));
    std::vector<TransitionRow> final_rows;
    for (const auto& t : r.machine.transitions) final_rows.push_back({t.source, t.target, t.event, t.guard, t.actions});
    const bool same = action_multiset(final_rows) == action_multiset(last_good.transition_rows);
    const bool warned = std::any_of(r.warnings.begin(), r.warnings.end(), [](const Warning& w) {
      return w.step == "S4" && w.component == "actions" &&
             w.message.find("keeping") != std::string::npos;
    });
    if (!same || !warned) {
      bad += " " + s.id + (same ? "" : "(actions differ)") + (warned ? "" : "(no warning)");
    }
  }
  return {runs > 0 && bad.empty(),
          std::to_string(runs) + " corrupted S4 transcripts; final actions equal the S3 snapshot, "
          "fallback warned" + bad};
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + kCli.string() + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

Outcome replay_determinism() {
  if (kCli.empty() || !fs::exists(kCli)) return {false, "smforge binary not built"};
  for (const char* var : {"SMFORGE_OPENAI_KEY", "SMFORGE_ANTHROPIC_KEY", "SMFORGE_BASE_URL",
                          "OPENAI_API_KEY", "ANTHROPIC_API_KEY"}) {
    ::unsetenv(var);
  }
  const fs::path tmp = fs::temp_directory_path() / "smforge_acceptance_bench";
  fs::remove_all(tmp);
  const std::string common = "bench --corpus \"" + (kRoot / "corpus" / "mini").string() +
                             "\" --replay \"" + (kRoot / "fixtures" / "replay").string() + "\"";
  const int rc1 = run_cli(common + " --jobs 4 --out \"" + (tmp / "a").string() + "\"");
  const int rc2 = run_cli(common + " --jobs 1 --out \"" + (tmp / "b").string() + "\"");
  if (rc1 != 0 || rc2 != 0) {
    return {false, "bench exit codes " + std::to_string(rc1) + ", " + std::to_string(rc2)};
  }
  auto a = tree_bytes(tmp / "a");
  auto b = tree_bytes(tmp / "b");
  auto summary = nlohmann::json::parse(a["summary.json"]);
  const bool none_failed = summary["excluded"].empty();
  const bool same = a == b && !a.empty();
  return {same && none_failed,
          std::to_string(a.size()) + " report files " + (same ? "byte-identical" : "differ") +
              " across two runs without credentials" +
              (none_failed ? "" : "; some runs failed: " + summary["excluded"].dump())};
}

Outcome leakage_exclusion() {
  const auto corpus = load_corpus(kRoot / "corpus" / "mini");
  std::map<std::string, std::string> descriptions;
  for (const auto& s : corpus) descriptions[s.id] = s.description;
  std::size_t blocks = 0, transcripts = 0;
  std::string bad;
  for (const auto& item : replay_bundle()) {
    ++transcripts;
    const std::string desc(descriptions.count(item.scenario_id) ? descriptions[item.scenario_id] : "");
    std::string first_line = desc.substr(0, desc.find('\n'));
    for (const auto& e : read_transcript(item.path)) {
      for (const auto& m : e.request.messages) {
        for (const auto& b : extract_example_blocks(m.content)) {
          ++blocks;
          const bool leaks = b.find(item.scenario_id) != std::string::npos ||
                             (!desc.empty() && b.find(desc) != std::string::npos) ||
                             (!first_line.empty() && b.find(first_line) != std::string::npos);
          if (leaks) bad += " " + item.path.filename().string();
        }
      }
    }
  }
  return {transcripts > 0 && blocks > 0 && bad.empty(),
          std::to_string(blocks) + " example blocks in " + std::to_string(transcripts) +
              " transcripts, none from the test scenario" + bad};
}

Outcome sampling_audit() {
  std::size_t requests = 0, creative = 0;
  std::string bad;
  for (const auto& item : replay_bundle()) {
    const auto entries = read_transcript(item.path);
    const auto steps = expected_steps(item.strategy, entries.size());
    if (steps.size() != entries.size()) {
      bad += " " + item.path.filename().string() + "(call count)";
      continue;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      ++requests;
      const auto& rq = entries[i].request;
      const bool may_be_creative = steps[i] == "S1" || steps[i] == "E1";
      if (rq.max_tokens != 1500) bad += " max_tokens@" + steps[i];
      if (rq.temperature == 0.5) {
        ++creative;
        if (!may_be_creative) bad += " 0.5@" + steps[i];
      } else if (rq.temperature != 0.01) {
        bad += " temperature " + fmt(rq.temperature, 2) + "@" + steps[i];
      }
    }
  }
  return {requests > 0 && bad.empty(),
          std::to_string(requests) + " requests, " + std::to_string(creative) +
              " at 0.5 (all on S1/E1), rest at 0.01, max_tokens 1500" + bad};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"corpus integrity", corpus_integrity},
      {"round-trips", round_trips},
      {"evaluator identity", evaluator_identity},
      {"metric conventions", metric_conventions},
      {"oracle equivalence", oracle_equivalence},
      {"fp propagation", fp_propagation},
      {"fallback rule", fallback_rule},
      {"replay determinism", replay_determinism},
      {"leakage exclusion", leakage_exclusion},
      {"sampling profile audit", sampling_audit},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
