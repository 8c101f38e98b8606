#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixture_responder.hpp"
#include "smforge/bench.hpp"
#include "smforge/corpus.hpp"
#include "smforge/report.hpp"
#include "smforge/umple.hpp"

using namespace smforge;
namespace fs = std::filesystem;

namespace {

const fs::path kMini = fs::path(SMFORGE_SOURCE_DIR) / "corpus" / "mini";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("smforge_corpus_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Corpus, MiniScenariosMatchDeclaredCounts) {
  auto corpus = load_corpus(kMini);
  ASSERT_EQ(corpus.size(), 4u);
  for (const auto& s : corpus) {
    auto v = verify_counts(s);
    EXPECT_TRUE(v.ok()) << s.id << ": " << v.detail();
    EXPECT_FALSE(s.description.empty());
    EXPECT_FALSE(verify_reference(s).has_value());
  }
  EXPECT_EQ(example_pool(corpus),
            (std::vector<std::string>{"coffee_maker", "pool_controller", "parking_meter",
                                      "washing_machine"}));
}

TEST(Corpus, MissingDescription) {
  auto dir = scratch("missing");
  fs::copy(kMini / "coffee_maker", dir / "x");
  fs::remove(dir / "x" / "description.txt");
  try {
    load_scenario(dir / "x");
    FAIL();
  } catch (const MissingFile& e) {
    EXPECT_EQ(e.path().filename(), "description.txt");
  }
}

TEST(Corpus, MismatchNamesComponent) {
  auto dir = scratch("mismatch");
  fs::copy(kMini / "parking_meter", dir / "pm");
  std::string meta = slurp(dir / "pm" / "meta.toml");
  meta.replace(meta.find("transitions = 14"), 16, "transitions = 15");
  write(dir / "pm" / "meta.toml", meta);
  auto v = verify_counts(load_scenario(dir / "pm"));
  ASSERT_FALSE(v.ok());
  EXPECT_EQ(v.mismatches[0].component, Component::kTransitions);
  EXPECT_NE(v.detail().find("transitions: declared 15, actual 14"), std::string::npos);
}

TEST(Corpus, MetaValidation) {
  EXPECT_THROW(parse_meta("states = many"), MetaError);
  EXPECT_THROW(parse_meta("colour = 3"), MetaError);
  EXPECT_THROW(parse_meta("mood: a = b"), MetaError);
  auto m = parse_meta("states = 2 # two\nstate: Run = Active\nevent: go = start\n");
  EXPECT_EQ(m.declared.states, 2u);
  EXPECT_EQ(m.aliases.truth_for(AliasSpace::kState, "run"), "active");
  EXPECT_EQ(m.alias_pairs.size(), 2u);
}

TEST(Corpus, ReferenceCountsForPrinter) {
  auto c = reference_counts("Printer");
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (ComponentCounts{6, 17, 6, 3, 2, 0, 1}));
  EXPECT_FALSE(reference_counts("toaster"));
}

TEST(Report, FormatsFourDecimals) {
  EXPECT_EQ(format_metric(2.0 / 3.0), "0.6667");
  EXPECT_EQ(format_metric(1.0), "1.0000");
  EvalReport r;
  r.components[0] = Metrics{0.75, 0.6, 2.0 / 3.0};
  r.aggregate = r.components[0];
  auto md = markdown_metrics_table(r, AverageMode::kMacro);
  EXPECT_NE(md.find("0.7500 | 0.6000 | 0.6667"), std::string::npos);
  EXPECT_NE(md.find("excluded"), std::string::npos);
  EXPECT_NE(md.find("Averaging: macro"), std::string::npos);
}

TEST(Bench, RunsGridAndWritesStableReports) {
  auto corpus = load_corpus(kMini);
  BenchConfig cfg;
  cfg.strategies = {Strategy::kSinglePrompt, Strategy::kStructureDriven};
  cfg.model = "fixture-model";
  cfg.jobs = 3;
  cfg.backend_for = [](Strategy st, const Scenario& s) {
    return fixtures::responder(
        fixtures::perturb(s, fixtures::seed_of(std::string(strategy_name(st)) + "/" + s.id)));
  };
  auto a = run_bench(corpus, cfg);
  EXPECT_FALSE(a.any_failed());
  EXPECT_EQ(a.runs.size(), 8u);
  EXPECT_EQ(a.summaries.size(), 2u);
  cfg.jobs = 1;
  auto b = run_bench(corpus, cfg);
  auto da = scratch("bench_a"), db = scratch("bench_b");
  write_bench_reports(a, da);
  write_bench_reports(b, db);
  EXPECT_EQ(slurp(da / "summary.md"), slurp(db / "summary.md"));
  EXPECT_EQ(slurp(da / "summary.json"), slurp(db / "summary.json"));
  EXPECT_TRUE(fs::exists(da / "structure_driven" / "coffee_maker.ump"));
  EXPECT_NE(slurp(da / "summary.md").find("| structure_driven |"), std::string::npos);
}

TEST(Bench, FailedRunIsExcludedAndAuthIsFatal) {
  auto corpus = load_corpus(kMini);
  BenchConfig cfg;
  cfg.strategies = {Strategy::kSinglePrompt};
  cfg.model = "m";
  cfg.backend_for = [](Strategy, const Scenario& s) -> BackendPtr {
    if (s.id == "pool_controller") return std::make_shared<ReplayBackend>(std::vector<TranscriptEntry>{});
    return fixtures::responder(s.truth);
  };
  auto r = run_bench(corpus, cfg);
  EXPECT_TRUE(r.any_failed());
  EXPECT_NE(bench_summary_markdown(r).find("pool_controller"), std::string::npos);
  EXPECT_DOUBLE_EQ(r.summaries.at(Strategy::kSinglePrompt).aggregate->f1, 1.0);

  cfg.backend_for = [](Strategy, const Scenario&) -> BackendPtr {
    return std::make_shared<FunctionBackend>(
        [](const CompletionRequest&) -> CompletionResponse { throw AuthError("bad key"); });
  };
  EXPECT_THROW(run_bench(corpus, cfg), AuthError);
}
