// Writes the replay bundle: one transcript per (strategy, scenario), answered
// by the scripted responder from a perturbed copy of the ground truth, plus
// a structure-driven bundle whose S4 reply is cut off.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fixture_responder.hpp"
#include "smforge/corpus.hpp"
#include "smforge/strategies.hpp"

namespace fs = std::filesystem;
using namespace smforge;

namespace {

constexpr const char* kModel = "fixture-model";

void write_transcript(const fs::path& path, const Transcript& t) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (auto e : t.entries) {
    e.ms = 0;
    out << format_transcript_line(e);
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Transcript record(const std::vector<Scenario>& corpus, const Scenario& s, Strategy st,
                  const StateMachine& gen, const std::string& corrupt_step) {
  GenerationConfig cfg;
  cfg.strategy = st;
  cfg.model = kModel;
  cfg.example_pool = example_pool(corpus);
  RunInputs in{s.id, s.description, to_examples(corpus), nullptr};
  auto backend = fixtures::responder(gen, corrupt_step);
  return run_strategy(in, cfg, *backend).transcript;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the replay fixtures"};
  std::string corpus_dir = "corpus/mini";
  std::string out_dir = "fixtures";
  app.add_option("--corpus", corpus_dir, "Scenario corpus");
  app.add_option("--out", out_dir, "Fixture root");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = load_corpus(corpus_dir);
    const fs::path out = out_dir;
    nlohmann::json manifest = {{"model", kModel}, {"corpus", corpus_dir}};
    nlohmann::json runs = nlohmann::json::object();

    for (Strategy st : kAllStrategies) {
      const std::string sname(strategy_name(st));
      for (const auto& s : corpus) {
        std::vector<std::string> notes;
        const auto gen = fixtures::perturb(s, fixtures::seed_of(sname + "/" + s.id), &notes);
        const auto t = record(corpus, s, st, gen, "");
        write_transcript(out / "replay" / sname / (s.id + ".jsonl"), t);
        runs[sname + "/" + s.id] = {{"calls", t.entries.size()}, {"edits", notes}};
      }
    }
    manifest["runs"] = runs;
    std::ofstream(out / "replay" / "manifest.json") << manifest.dump(2) << "\n";

    nlohmann::json corrupt = {{"model", kModel}, {"corrupt_step", "S4"}};
    for (const auto& s : corpus) {
      const auto t = record(corpus, s, Strategy::kStructureDriven, s.truth, "S4");
      write_transcript(out / "corrupt_s4" / "structure_driven" / (s.id + ".jsonl"), t);
    }
    std::ofstream(out / "corrupt_s4" / "manifest.json") << corrupt.dump(2) << "\n";
    std::cout << "wrote fixtures under " << out.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
