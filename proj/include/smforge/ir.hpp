#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smforge {

struct StateNode;

struct Region {
  std::string name;
  std::vector<StateNode> substates;
  std::string initial;
};

enum class StateKind { kSimple, kComposite };

struct StateNode {
  std::string name;
  StateKind kind = StateKind::kSimple;
  std::vector<Region> regions;
  bool has_history = false;

  bool is_composite() const { return kind == StateKind::kComposite; }
};

struct Transition {
  std::string source;
  std::string target;
  std::optional<std::string> event;
  std::optional<std::string> guard;
  std::vector<std::string> actions;

  friend bool operator==(const Transition&, const Transition&) = default;
  friend auto operator<=>(const Transition&, const Transition&) = default;
};

struct StateMachine {
  std::string name;
  std::vector<StateNode> root_states;
  std::vector<Transition> transitions;
  std::set<std::string> events;
};

struct ComponentCounts {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t guards = 0;
  std::size_t actions = 0;
  std::size_t hierarchical_states = 0;
  std::size_t parallel_regions = 0;
  std::size_t history_states = 0;

  friend bool operator==(const ComponentCounts&,
                         const ComponentCounts&) = default;
};

std::string to_string(const ComponentCounts& counts);

// The seven scored components, in reporting order.
enum class Component {
  kStates,
  kTransitions,
  kGuards,
  kActions,
  kHierarchical,
  kParallel,
  kHistory,
};

inline constexpr Component kAllComponents[] = {
    Component::kStates,       Component::kTransitions, Component::kGuards,
    Component::kActions,      Component::kHierarchical, Component::kParallel,
    Component::kHistory,
};

/// Short machine-readable key ("states", "transitions", ..., "history").
std::string_view component_key(Component c);
/// Display label used in report tables ("Hierarchical states", ...).
std::string_view component_label(Component c);
std::optional<Component> component_from_key(std::string_view key);

std::size_t count_of(const ComponentCounts& counts, Component c);

struct Violation {
  std::string rule;
  std::string element;

  std::string to_string() const { return rule + ": " + element; }
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class NameUnusable : public std::invalid_argument {
 public:
  explicit NameUnusable(const std::string& raw)
      : std::invalid_argument("name has no alphanumeric content: '" + raw +
                              "'") {}
};

/// Canonical comparison key for state and event names: lowercase ASCII
/// alphanumerics only, so "Paper_Jam", "paperJam " and "paper jam" coincide.
/// Throws NameUnusable when nothing survives.
std::string normalize_name(std::string_view raw);

/// Like normalize_name but returns an empty string instead of throwing.
std::string try_normalize_name(std::string_view raw);

/// Turns free text into a valid identifier ([A-Za-z_][A-Za-z0-9_]*): runs of
/// other characters become '_', leading/trailing '_' from that are trimmed.
/// Returns "" if no alphanumeric content remains.
std::string to_identifier(std::string_view raw);

bool is_identifier(std::string_view s);

/// Guard/action comparison key: lowercase, whitespace collapsed, trailing
/// punctuation stripped.
std::string canonical_annotation(std::string_view text);

std::vector<Violation> validate(const StateMachine& sm);

/// Throws ValidationError if validate() reports anything.
void require_valid(const StateMachine& sm);

ComponentCounts component_counts(const StateMachine& sm);

/// Depth-first, document order. Returns the first state whose normalized
/// name equals normalize(canonical).
const StateNode* find_state(const StateMachine& sm, std::string_view canonical);
StateNode* find_state(StateMachine& sm, std::string_view canonical);

/// Visits every state depth-first in document order. The callback receives
/// the node, its parent (nullptr at root) and the index of the region of the
/// parent that holds it.
template <typename Fn>
void for_each_state(const std::vector<StateNode>& states, Fn&& fn,
                    const StateNode* parent = nullptr,
                    std::size_t region_index = 0) {
  for (const auto& s : states) {
    fn(s, parent, region_index);
    for (std::size_t r = 0; r < s.regions.size(); ++r) {
      for_each_state(s.regions[r].substates, fn, &s, r);
    }
  }
}

/// Fills empty region names with "r1", "r2", ... per composite and sets an
/// empty `initial` to the first substate. Recomputes `events` from the
/// transition triggers when `recompute_events` is set.
void finalize_structure(StateMachine& sm, bool recompute_events = true);

/// Equality up to region names: same machine name, same root order, same
/// state tree (each region compared with its initial first), same
/// transition multiset and same event set.
bool equivalent(const StateMachine& a, const StateMachine& b);

/// Human-readable difference for test diagnostics; empty if equivalent.
std::string describe_difference(const StateMachine& a, const StateMachine& b);

}  // namespace smforge
