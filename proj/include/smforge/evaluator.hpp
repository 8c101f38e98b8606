#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smforge/ir.hpp"

namespace smforge {

enum class AliasSpace { kState, kEvent, kGuard, kAction };

std::string_view alias_space_key(AliasSpace space);
std::optional<AliasSpace> alias_space_from_key(std::string_view key);

class AliasConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-scenario semantic-equivalence judgments, stored on canonical forms
/// (normalize_name for states/events, canonical_annotation for guards and
/// actions). One-to-one within each space.
class AliasMap {
 public:
  /// Throws AliasConflict if either side is already paired differently.
  void add(AliasSpace space, std::string_view generated, std::string_view truth);

  std::optional<std::string> truth_for(AliasSpace space, std::string_view generated) const;
  std::optional<std::string> generated_for(AliasSpace space, std::string_view truth) const;

  /// Canonical key of a raw value in the given space.
  static std::string canonical(AliasSpace space, std::string_view raw);

  /// Same pairs with generated and truth sides swapped.
  AliasMap inverted() const;

  bool empty() const;
  std::size_t size() const;

 private:
  static constexpr std::size_t kSpaces = 4;
  std::array<std::map<std::string, std::string>, kSpaces> forward_;
  std::array<std::map<std::string, std::string>, kSpaces> backward_;
};

struct ComponentMatch {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<std::string> matched;          // "gen => truth"
  std::vector<std::string> false_positives;  // generated side
  std::vector<std::string> false_negatives;  // truth side

  friend bool operator==(const ComponentMatch&, const ComponentMatch&) = default;
};

struct MatchSets {
  std::array<ComponentMatch, 7> components;

  ComponentMatch& operator[](Component c) { return components[static_cast<std::size_t>(c)]; }
  const ComponentMatch& operator[](Component c) const {
    return components[static_cast<std::size_t>(c)];
  }
};

/// Generated state key -> truth state key (both normalize_name keys).
using StateMapping = std::map<std::string, std::string>;

struct StateMatching {
  StateMapping mapping;
  ComponentMatch states;
};

/// A generated state matches a truth state when their normalized names are
/// equal or the pair is aliased. Alias pairs bind first; an alias whose
/// sides also name-match other states throws AliasConflict.
StateMatching match_states(const StateMachine& gen, const StateMachine& truth,
                           const AliasMap& aliases);

struct DependentMatch {
  ComponentMatch transitions;
  ComponentMatch guards;
  ComponentMatch actions;
};

/// Transitions touching an unmatched generated state are false positives
/// along with their guard and actions. The rest are paired one-to-one within
/// (mapped source, mapped target, event) classes by a maximum-weight
/// assignment that maximizes matched transitions, then matched guards, then
/// matched actions.
DependentMatch match_dependents(const StateMachine& gen, const StateMachine& truth,
                                const StateMapping& mapping, const AliasMap& aliases);

struct StructureMatch {
  ComponentMatch hierarchical;
  ComponentMatch parallel;
  ComponentMatch history;
};

StructureMatch match_structures(const StateMachine& gen, const StateMachine& truth,
                                const StateMapping& mapping);

/// Full comparison; both machines must validate.
MatchSets evaluate(const StateMachine& gen, const StateMachine& truth,
                   const AliasMap& aliases = {});

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Returns nullopt when tp = fp = fn = 0 (component excluded).
std::optional<Metrics> score_counts(const Counts& counts);

struct EvalReport {
  std::array<std::optional<Metrics>, 7> components;
  std::optional<Metrics> aggregate;
  /// Scenarios averaged per component (1 for a single-scenario report).
  std::array<std::size_t, 7> samples{};
  std::size_t aggregate_samples = 0;

  const std::optional<Metrics>& operator[](Component c) const {
    return components[static_cast<std::size_t>(c)];
  }
};

EvalReport score(const MatchSets& sets);

enum class AverageMode { kMacro, kPooled };

std::string_view average_mode_name(AverageMode mode);

/// Arithmetic mean of each metric over the reports where the component was
/// not excluded. Throws std::invalid_argument on an empty list.
EvalReport macro_average(const std::vector<EvalReport>& reports);

/// Sums counts over scenarios, then scores.
EvalReport pooled_average(const std::vector<MatchSets>& sets);

}  // namespace smforge
