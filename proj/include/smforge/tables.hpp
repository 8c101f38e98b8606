#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "smforge/diagnostics.hpp"
#include "smforge/ir.hpp"

namespace smforge {

/// One extracted `<table>`: rows of decoded cell text, first row = header.
struct RawTable {
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const RawTable&, const RawTable&) = default;
};

enum class RowKind { kSimple, kComposite, kHistoryMarker };

struct StateRow {
  std::string name;
  std::optional<std::string> parent;
  std::optional<std::string> region;
  RowKind kind = RowKind::kSimple;

  friend bool operator==(const StateRow&, const StateRow&) = default;
};

struct TransitionRow {
  std::string source;
  std::string target;
  std::optional<std::string> event;
  std::optional<std::string> guard;
  std::vector<std::string> actions;

  friend bool operator==(const TransitionRow&, const TransitionRow&) = default;
};

struct StructureRow {
  std::string composite;
  std::string region;
  std::vector<std::string> substates;
  bool has_history = false;

  friend bool operator==(const StructureRow&, const StructureRow&) = default;
};

/// Accumulated multi-step output. `events` holds names listed by an
/// event-extraction step; scored events come from transition triggers.
struct PartialModel {
  std::vector<StateRow> states_rows;
  std::vector<TransitionRow> transition_rows;
  std::vector<StructureRow> structure_rows;
  std::vector<std::string> events;
  std::map<Component, std::string> provenance;

  friend bool operator==(const PartialModel&, const PartialModel&) = default;
};

/// Result of classifying and reading a response's tables. `parsed` holds
/// the components whose data was present in a usable form.
struct TableParse {
  PartialModel model;
  std::set<Component> parsed;
  bool events_parsed = false;
  WarningLog warnings;

  bool ok(Component c) const { return parsed.contains(c); }
};

/// Scans `response` for `<table>...</table>` blocks. Tags are matched
/// case-insensitively; an unclosed cell ends at the next `<td`, `<th`,
/// `</tr` or `</table`; `&amp; &lt; &gt; &quot;` are decoded and all other
/// markup inside cells is dropped. Nested tables are flattened into the
/// enclosing cell's text. Tables missing `</table>` are not returned.
std::vector<RawTable> extract_html_tables(std::string_view response);

/// Classifies tables by header: States(Name, Parent, Region, Kind),
/// Transitions(Source, Target, Event, Guard, Actions), Structure(Composite,
/// Region, Substates, History), and an Events(Event) list.
TableParse parse_tables(const std::vector<RawTable>& tables);

/// extract + parse in one go.
TableParse parse_response_tables(std::string_view response);

/// Canonical rows for a machine: every state (depth-first) in the States
/// table, every transition, one Structure row per composite region.
PartialModel partial_from_machine(const StateMachine& sm);

/// Renders the three tables (States, Transitions, Structure) as HTML.
std::string emit_partial_tables(const PartialModel& partial);

std::string emit_tables(const StateMachine& sm);

/// Renders a one-column Events table.
std::string emit_events_table(const std::vector<std::string>& events);

std::string_view row_kind_name(RowKind kind);

}  // namespace smforge
