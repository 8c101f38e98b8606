#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>

#include "smforge/bench.hpp"
#include "smforge/corpus.hpp"
#include "smforge/evaluator.hpp"
#include "smforge/report.hpp"
#include "smforge/tables.hpp"
#include "smforge/umple.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace smforge;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict counts_dict(const ComponentCounts& c) {
  py::dict d;
  for (Component k : kAllComponents) d[py::str(std::string(component_key(k)))] = count_of(c, k);
  return d;
}

AliasMap alias_map(const std::vector<std::tuple<std::string, std::string, std::string>>& pairs) {
  AliasMap m;
  for (const auto& [space, gen, truth] : pairs) {
    auto s = alias_space_from_key(space);
    if (!s) throw py::value_error("unknown alias space: " + space);
    m.add(*s, gen, truth);
  }
  return m;
}

AverageMode average_mode(const std::string& name) {
  if (name == "macro") return AverageMode::kMacro;
  if (name == "pooled") return AverageMode::kPooled;
  throw py::value_error("average must be macro or pooled");
}

py::object replay_bench(const fs::path& corpus_dir, const fs::path& replay,
                        const std::vector<std::string>& strategies, const std::string& model,
                        const std::string& average, std::size_t jobs) {
  const auto corpus = load_corpus(corpus_dir);
  BenchConfig cfg;
  for (const auto& n : strategies) {
    auto st = strategy_from_name(n);
    if (!st) throw py::value_error("unknown strategy: " + n);
    cfg.strategies.push_back(*st);
  }
  if (cfg.strategies.empty()) cfg.strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
  cfg.model = model;
  cfg.average = average_mode(average);
  cfg.jobs = jobs;
  cfg.backend_for = [replay](Strategy st, const Scenario& s) -> BackendPtr {
    return ReplayBackend::from_file(replay / std::string(strategy_name(st)) / (s.id + ".jsonl"));
  };
  BenchResult r;
  {
    py::gil_scoped_release release;
    r = run_bench(corpus, cfg);
  }
  nlohmann::json out = {{"average", average_mode_name(r.average)}};
  for (const auto& [st, rep] : r.summaries) out["summaries"][strategy_name(st)] = metrics_json(rep);
  out["failed"] = nlohmann::json::array();
  for (const auto& run : r.runs)
    if (!run.ok)
      out["failed"].push_back(
          {{"strategy", strategy_name(run.strategy)}, {"scenario", run.scenario_id}, {"error", run.error}});
  return to_py(out);
}

}  // namespace

PYBIND11_MODULE(_smforge, m) {
  m.doc() = "State machine extraction: Umple I/O, evaluation and replay benchmarks";

  py::register_exception<ParseFailed>(m, "ParseFailed", PyExc_ValueError);
  py::register_exception<MissingFile>(m, "MissingFile", PyExc_FileNotFoundError);
  py::register_exception<MetaError>(m, "MetaError", PyExc_ValueError);
  py::register_exception<AliasConflict>(m, "AliasConflict", PyExc_ValueError);
  py::register_exception<GatewayError>(m, "GatewayError", PyExc_RuntimeError);

  py::class_<StateMachine>(m, "StateMachine")
      .def_readonly("name", &StateMachine::name)
      .def_property_readonly("events", [](const StateMachine& sm) { return std::vector<std::string>(sm.events.begin(), sm.events.end()); })
      .def("counts", [](const StateMachine& sm) { return counts_dict(component_counts(sm)); })
      .def("to_umple", &emit_umple)
      .def("to_tables", &emit_tables)
      .def("equivalent", [](const StateMachine& a, const StateMachine& b) { return equivalent(a, b); })
      .def("__repr__", [](const StateMachine& sm) { return "<StateMachine " + sm.name + ">"; });

  m.def(
      "parse_umple",
      [](const std::string& text, bool lenient) {
        auto doc = parse_umple(text, lenient ? ParseMode::kLenient : ParseMode::kStrict);
        std::vector<std::string> diags;
        for (const auto& d : doc.diagnostics) diags.push_back(d.to_string());
        return py::make_tuple(doc.machine ? py::cast(*doc.machine) : py::none(), diags);
      },
      py::arg("text"), py::arg("lenient") = false,
      "Returns (machine or None, diagnostics). Strict mode raises ParseFailed.");

  m.def(
      "evaluate",
      [](const StateMachine& gen, const StateMachine& truth,
         const std::vector<std::tuple<std::string, std::string, std::string>>& aliases) {
        auto sets = evaluate(gen, truth, alias_map(aliases));
        auto rep = score(sets);
        return to_py({{"metrics", metrics_json(rep)}, {"matches", match_json(sets)}});
      },
      py::arg("generated"), py::arg("truth"), py::arg("aliases") = std::vector<std::tuple<std::string, std::string, std::string>>{},
      "aliases: (space, generated, truth) triples with space in state/event/guard/action.");

  m.def(
      "score_counts",
      [](std::size_t tp, std::size_t fp, std::size_t fn) -> py::object {
        auto s = score_counts({tp, fp, fn});
        if (!s) return py::none();
        return py::make_tuple(s->precision, s->recall, s->f1);
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"));

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("id", &Scenario::id)
      .def_readonly("description", &Scenario::description)
      .def_readonly("truth", &Scenario::truth)
      .def_property_readonly("declared", [](const Scenario& s) { return counts_dict(s.declared); })
      .def_property_readonly("aliases", [](const Scenario& s) {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& p : s.alias_pairs) out.emplace_back(std::string(alias_space_key(p.space)), p.generated, p.truth);
        return out;
      })
      .def("verify", [](const Scenario& s) -> std::optional<std::string> {
        auto v = verify_counts(s);
        if (v.ok()) return std::nullopt;
        return v.detail();
      }, "None when the declared counts match the model, else the mismatch detail.");

  m.def("load_corpus", &load_corpus, py::arg("root"));
  m.def("load_scenario", &load_scenario, py::arg("dir"));
  m.def("replay_bench", &replay_bench, py::arg("corpus"), py::arg("replay"),
        py::arg("strategies") = std::vector<std::string>{}, py::arg("model") = "fixture-model",
        py::arg("average") = "macro", py::arg("jobs") = 1);
}
