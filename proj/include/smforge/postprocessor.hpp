#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "smforge/diagnostics.hpp"
#include "smforge/ir.hpp"
#include "smforge/tables.hpp"

namespace smforge {

/// What one pipeline step produced.
struct StepOutcome {
  std::string step_id;
  std::string raw_response;
  TableParse parsed;
  double temperature_used = 0.0;
  bool truncated = false;
};

/// Which parts of the accumulated model a step is allowed to change.
struct StepRole {
  /// Components replaced wholesale when parsed; fallback when not.
  std::set<Component> replaces;
  /// Components replaced when present, silently passed through when absent.
  std::set<Component> optional;
  /// Per-event steps append their transition rows instead of replacing.
  bool accumulates_transitions = false;
  /// The step's answer is an event list.
  bool lists_events = false;
};

/// Roles of the built-in steps: S1..S6 (structure-driven), E1, E2, E3:<event>,
/// E4..E6 (event-driven). Unknown ids get an empty role.
StepRole step_role(std::string_view step_id);

struct MergeState {
  std::map<std::string, PartialModel> snapshots;
  PartialModel current;
  WarningLog warnings;
  std::vector<std::string> order;  // merged step ids, in merge order
};

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class FinalizeFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies one step's parsed output. Parsed components replace the current
/// rows and take the step as provenance; components the step owns but
/// failed to parse keep their previous rows and log a fallback warning.
/// Throws PreconditionError if the step was merged before.
MergeState merge_step(MergeState state, const StepOutcome& outcome);

/// Collapses duplicate transition rows (same normalized source, target,
/// event and canonical guard; action lists unioned in first-seen order),
/// duplicate state rows (composite beats simple) and duplicate structure
/// rows. Variants that differ only in guard are kept and logged.
PartialModel dedupe(const PartialModel& partial, WarningLog* log = nullptr);

/// Builds a valid machine from the rows. Structure rows decide parentage
/// over state-row parents; the first claim on a state wins. Transitions
/// with unknown endpoints are dropped with a warning. Throws FinalizeFailed
/// when no state survives.
StateMachine finalize(const PartialModel& partial, std::string_view machine_name,
                      WarningLog* log = nullptr);

}  // namespace smforge
