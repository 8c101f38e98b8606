#include "smforge/report.hpp"

#include <cstdio>

namespace smforge {

using nlohmann::json;

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

namespace {

std::string cell(const std::optional<Metrics>& m, double Metrics::*field) {
  return m ? format_metric((*m).*field) : "excluded";
}

std::string mode_line(AverageMode mode) {
  return "Averaging: " + std::string(average_mode_name(mode)) + "\n";
}

}  // namespace

std::string markdown_metrics_table(const EvalReport& report, AverageMode mode) {
  std::string out = "| Component | Precision | Recall | F1 |\n|---|---:|---:|---:|\n";
  auto row = [&](std::string_view label, const std::optional<Metrics>& m) {
    out += "| " + std::string(label) + " | " + cell(m, &Metrics::precision) + " | " +
           cell(m, &Metrics::recall) + " | " + cell(m, &Metrics::f1) + " |\n";
  };
  for (Component c : kAllComponents) row(component_label(c), report[c]);
  row("All", report.aggregate);
  out += "\n" + mode_line(mode);
  return out;
}

std::string markdown_f1_comparison(const std::vector<std::pair<std::string, EvalReport>>& columns,
                                   AverageMode mode) {
  std::string out = "| Component |";
  std::string rule = "|---|";
  for (const auto& [name, _] : columns) {
    out += " " + name + " |";
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  auto row = [&](std::string_view label, auto get) {
    out += "| " + std::string(label) + " |";
    for (const auto& [_, r] : columns) out += " " + cell(get(r), &Metrics::f1) + " |";
    out += "\n";
  };
  for (Component c : kAllComponents) {
    row(component_label(c), [c](const EvalReport& r) { return r[c]; });
  }
  row("All", [](const EvalReport& r) { return r.aggregate; });
  out += "\n" + mode_line(mode);
  return out;
}

std::string markdown_overall_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                                   AverageMode mode) {
  std::string out = "| Strategy | Precision | Recall | F1 |\n|---|---:|---:|---:|\n";
  for (const auto& [name, r] : rows) {
    out += "| " + name + " | " + cell(r.aggregate, &Metrics::precision) + " | " +
           cell(r.aggregate, &Metrics::recall) + " | " + cell(r.aggregate, &Metrics::f1) + " |\n";
  }
  out += "\n" + mode_line(mode);
  return out;
}

json metrics_json(const EvalReport& report) {
  auto one = [](const std::optional<Metrics>& m) -> json {
    if (!m) return nullptr;
    return {{"precision", m->precision}, {"recall", m->recall}, {"f1", m->f1}};
  };
  json comps = json::object();
  for (Component c : kAllComponents) {
    comps[std::string(component_key(c))] = one(report[c]);
  }
  return {{"components", comps}, {"all", one(report.aggregate)}};
}

json match_json(const MatchSets& sets) {
  json out = json::object();
  for (Component c : kAllComponents) {
    const auto& m = sets[c];
    out[std::string(component_key(c))] = {{"tp", m.tp},
                                          {"fp", m.fp},
                                          {"fn", m.fn},
                                          {"matched", m.matched},
                                          {"false_positives", m.false_positives},
                                          {"false_negatives", m.false_negatives}};
  }
  return out;
}

json scenario_record(std::string_view scenario_id, std::string_view strategy,
                     const MatchSets& sets, const EvalReport& report, const WarningLog& warnings) {
  json warn = json::array();
  for (const auto& w : warnings) warn.push_back(w.to_string());
  return {{"scenario", scenario_id},
          {"strategy", strategy},
          {"counts", match_json(sets)},
          {"metrics", metrics_json(report)},
          {"warnings", std::move(warn)}};
}

}  // namespace smforge
