#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smforge/diagnostics.hpp"
#include "smforge/evaluator.hpp"

namespace smforge {

/// Fixed four decimals, e.g. 0.6667.
std::string format_metric(double v);

/// Components + All as rows, P/R/F1 as columns. Excluded components show
/// "excluded". Ends with a line naming the averaging mode.
std::string markdown_metrics_table(const EvalReport& report, AverageMode mode);

/// One column per named report: F1 of every component plus All.
std::string markdown_f1_comparison(const std::vector<std::pair<std::string, EvalReport>>& columns,
                                   AverageMode mode);

/// One row per named report: overall P/R/F1.
std::string markdown_overall_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                                   AverageMode mode);

nlohmann::json metrics_json(const EvalReport& report);
nlohmann::json match_json(const MatchSets& sets);

/// Machine-readable record of one evaluated scenario.
nlohmann::json scenario_record(std::string_view scenario_id, std::string_view strategy,
                               const MatchSets& sets, const EvalReport& report,
                               const WarningLog& warnings);

}  // namespace smforge
