#include "smforge/postprocessor.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>

#include "text_util.hpp"

namespace smforge {

StepRole step_role(std::string_view step_id) {
  StepRole role;
  using C = Component;
  if (step_id == "S1" || step_id == "E1") {
    role.replaces = {C::kStates};
  } else if (step_id == "S2" || step_id == "E5") {
    role.replaces = {C::kParallel};
  } else if (step_id == "S3") {
    role.replaces = {C::kTransitions, C::kGuards};
  } else if (step_id == "S4") {
    role.replaces = {C::kActions};
  } else if (step_id == "S5") {
    role.replaces = {C::kHierarchical};
  } else if (step_id == "E4") {
    role.replaces = {C::kHierarchical};
    role.optional = {C::kTransitions, C::kGuards, C::kActions};
  } else if (step_id == "S6" || step_id == "E6") {
    role.replaces = {C::kHistory};
  } else if (step_id == "E2") {
    role.lists_events = true;
  } else if (step_id.starts_with("E3:")) {
    role.accumulates_transitions = true;
  }
  return role;
}

namespace {

// ---------------------------------------------------------------------------
// Keys

using TransitionKey = std::tuple<std::string, std::string, std::string>;

TransitionKey endpoint_key(const TransitionRow& t) {
  return {try_normalize_name(t.source), try_normalize_name(t.target),
          t.event ? try_normalize_name(*t.event) : std::string()};
}

// (source, target, event) plus the occurrence index among rows sharing it.
std::vector<std::pair<TransitionKey, std::size_t>> occurrence_keys(
    const std::vector<TransitionRow>& rows) {
  std::map<TransitionKey, std::size_t> seen;
  std::vector<std::pair<TransitionKey, std::size_t>> out;
  for (const auto& r : rows) {
    auto k = endpoint_key(r);
    out.emplace_back(k, seen[k]++);
  }
  return out;
}

std::string describe(const TransitionRow& t) {
  std::string s = t.source + " -> " + t.target;
  if (t.event) s += " on " + *t.event;
  if (t.guard) s += " [" + *t.guard + "]";
  if (!t.actions.empty()) {
    s += " / {";
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
      s += (i ? "; " : " ") + t.actions[i];
    }
    s += " }";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Structure helpers

std::map<std::string, std::size_t> region_counts(
    const std::vector<StructureRow>& rows) {
  std::map<std::string, std::set<std::string>> regions;
  for (const auto& r : rows) {
    regions[try_normalize_name(r.composite)].insert(try_normalize_name(r.region));
  }
  std::map<std::string, std::size_t> out;
  for (const auto& [k, v] : regions) out[k] = v.size();
  return out;
}

bool is_parallel_row(const StructureRow& row,
                     const std::map<std::string, std::size_t>& counts) {
  auto it = counts.find(try_normalize_name(row.composite));
  return it != counts.end() && it->second >= 2;
}

// Composites flagged with history, by display name in first-seen order.
std::vector<std::string> history_set(const PartialModel& p) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (seen.insert(try_normalize_name(name)).second) out.push_back(name);
  };
  for (const auto& r : p.structure_rows) {
    if (r.has_history) add(r.composite);
  }
  for (const auto& s : p.states_rows) {
    if (s.kind == RowKind::kHistoryMarker && s.parent) add(*s.parent);
  }
  return out;
}

void apply_history(PartialModel& p, const std::vector<std::string>& composites) {
  std::erase_if(p.states_rows,
                [](const StateRow& s) { return s.kind == RowKind::kHistoryMarker; });
  for (auto& r : p.structure_rows) r.has_history = false;
  for (const auto& name : composites) {
    const std::string key = try_normalize_name(name);
    bool found = false;
    for (auto& r : p.structure_rows) {
      if (try_normalize_name(r.composite) == key) {
        r.has_history = true;
        found = true;
      }
    }
    if (!found) p.states_rows.push_back({"H", name, std::nullopt, RowKind::kHistoryMarker});
  }
}

// ---------------------------------------------------------------------------
// Component replacement

void replace_states(PartialModel& cur, const PartialModel& parsed) {
  std::vector<StateRow> rows;
  for (const auto& s : parsed.states_rows) {
    if (s.kind != RowKind::kHistoryMarker) rows.push_back(s);
  }
  for (const auto& s : cur.states_rows) {
    if (s.kind == RowKind::kHistoryMarker) rows.push_back(s);
  }
  cur.states_rows = std::move(rows);
}

// New transition rows; guards/actions come from `parsed` only when the
// respective flag is set, otherwise they are carried over by key.
void replace_transitions(PartialModel& cur, const PartialModel& parsed,
                         bool take_guards, bool take_actions) {
  std::map<std::pair<TransitionKey, std::size_t>, const TransitionRow*> old;
  auto old_keys = occurrence_keys(cur.transition_rows);
  for (std::size_t i = 0; i < old_keys.size(); ++i) {
    old[old_keys[i]] = &cur.transition_rows[i];
  }
  std::vector<TransitionRow> rows = parsed.transition_rows;
  auto new_keys = occurrence_keys(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = old.find(new_keys[i]);
    const TransitionRow* prev = it == old.end() ? nullptr : it->second;
    if (!take_guards) rows[i].guard = prev ? prev->guard : std::nullopt;
    if (!take_actions) {
      rows[i].actions = prev ? prev->actions : std::vector<std::string>{};
    }
  }
  cur.transition_rows = std::move(rows);
}

template <typename Field>
void overlay_field(PartialModel& cur, const PartialModel& parsed, Field field) {
  std::map<std::pair<TransitionKey, std::size_t>, const TransitionRow*> incoming;
  auto in_keys = occurrence_keys(parsed.transition_rows);
  for (std::size_t i = 0; i < in_keys.size(); ++i) {
    incoming[in_keys[i]] = &parsed.transition_rows[i];
  }
  auto cur_keys = occurrence_keys(cur.transition_rows);
  for (std::size_t i = 0; i < cur.transition_rows.size(); ++i) {
    auto it = incoming.find(cur_keys[i]);
    field(cur.transition_rows[i], it == incoming.end() ? nullptr : it->second);
  }
}

void replace_structure(PartialModel& cur, const PartialModel& parsed, bool parallel) {
  const auto cur_counts = region_counts(cur.structure_rows);
  const auto in_counts = region_counts(parsed.structure_rows);
  const auto keep_history = history_set(cur);

  std::set<std::string> incoming_composites;
  std::vector<StructureRow> incoming;
  for (const auto& r : parsed.structure_rows) {
    if (is_parallel_row(r, in_counts) != parallel) continue;
    // A hierarchy step may not turn an existing parallel composite back
    // into a single-region one.
    if (!parallel && is_parallel_row(r, cur_counts)) continue;
    incoming.push_back(r);
    incoming_composites.insert(try_normalize_name(r.composite));
  }

  std::vector<StructureRow> rows;
  for (const auto& r : cur.structure_rows) {
    const bool row_parallel = is_parallel_row(r, cur_counts);
    if (row_parallel == parallel) continue;  // replaced
    if (parallel && incoming_composites.contains(try_normalize_name(r.composite))) {
      continue;  // composite became parallel
    }
    rows.push_back(r);
  }
  rows.insert(rows.end(), incoming.begin(), incoming.end());
  cur.structure_rows = std::move(rows);
  apply_history(cur, keep_history);
}

std::string fallback_source(const PartialModel& p, Component c) {
  auto it = p.provenance.find(c);
  return it == p.provenance.end() ? "no earlier step" : "output of " + it->second;
}

}  // namespace

MergeState merge_step(MergeState state, const StepOutcome& outcome) {
  const std::string& step = outcome.step_id;
  if (state.snapshots.contains(step)) {
    throw PreconditionError("step " + step + " already merged");
  }
  const StepRole role = step_role(step);
  const TableParse& in = outcome.parsed;
  PartialModel& cur = state.current;
  auto warn = [&](Component c, const std::string& msg) {
    state.warnings.push_back({step, std::string(component_key(c)), msg});
  };

  if (outcome.truncated) {
    state.warnings.push_back({step, "-", "response truncated (finish=length)"});
  }
  for (const auto& w : in.warnings) {
    state.warnings.push_back({step, w.component, w.message});
  }

  auto owns = [&](Component c) {
    return role.replaces.contains(c) ||
           (role.optional.contains(c) && in.ok(c));
  };
  auto take = [&](Component c) { return owns(c) && in.ok(c); };

  if (role.lists_events) {
    if (in.events_parsed) {
      cur.events = in.model.events;
    } else {
      state.warnings.push_back({step, "events", "no event table; no events listed"});
    }
  }

  if (role.accumulates_transitions) {
    if (in.ok(Component::kTransitions)) {
      for (const auto& r : in.model.transition_rows) cur.transition_rows.push_back(r);
      for (Component c : {Component::kTransitions, Component::kGuards, Component::kActions}) {
        if (in.ok(c)) cur.provenance[c] = step;
      }
    } else {
      state.warnings.push_back(
          {step, "transitions", "no transition table; event skipped"});
    }
  }

  if (take(Component::kStates)) {
    replace_states(cur, in.model);
    cur.provenance[Component::kStates] = step;
  }

  if (take(Component::kTransitions)) {
    replace_transitions(cur, in.model, take(Component::kGuards),
                        take(Component::kActions));
    cur.provenance[Component::kTransitions] = step;
    if (take(Component::kGuards)) cur.provenance[Component::kGuards] = step;
    if (take(Component::kActions)) cur.provenance[Component::kActions] = step;
  } else {
    if (take(Component::kGuards)) {
      overlay_field(cur, in.model, [](TransitionRow& row, const TransitionRow* src) {
        row.guard = src ? src->guard : std::nullopt;
      });
      cur.provenance[Component::kGuards] = step;
    }
    if (take(Component::kActions)) {
      overlay_field(cur, in.model, [](TransitionRow& row, const TransitionRow* src) {
        row.actions = src ? src->actions : std::vector<std::string>{};
      });
      cur.provenance[Component::kActions] = step;
    }
  }

  if (take(Component::kParallel)) {
    replace_structure(cur, in.model, /*parallel=*/true);
    cur.provenance[Component::kParallel] = step;
  }
  if (take(Component::kHierarchical)) {
    replace_structure(cur, in.model, /*parallel=*/false);
    cur.provenance[Component::kHierarchical] = step;
  }
  if (take(Component::kHistory)) {
    apply_history(cur, history_set(in.model));
    cur.provenance[Component::kHistory] = step;
  }

  for (Component c : role.replaces) {
    if (in.ok(c)) continue;
    if (c == Component::kParallel && !in.ok(Component::kHierarchical)) {
      // A plain "none" answer to the parallel-region question.
      const std::string answer = try_normalize_name(outcome.raw_response);
      if (answer == "none" || answer == "nonenone") {
        cur.provenance[c] = step;
        continue;
      }
    }
    warn(c, "parse failed; keeping " + fallback_source(cur, c));
  }

  state.order.push_back(step);
  state.snapshots.emplace(step, cur);
  return state;
}

// ---------------------------------------------------------------------------
// Dedupe

PartialModel dedupe(const PartialModel& partial, WarningLog* log) {
  PartialModel out = partial;
  auto warn = [&](const std::string& component, const std::string& msg) {
    if (log) log->push_back({"dedupe", component, msg});
  };

  // States: collapse by normalized name; composite wins.
  out.states_rows.clear();
  std::map<std::string, std::size_t> state_index;
  std::set<std::string> markers;
  for (const auto& s : partial.states_rows) {
    if (s.kind == RowKind::kHistoryMarker) {
      const std::string key = try_normalize_name(s.parent.value_or(""));
      if (markers.insert(key).second) out.states_rows.push_back(s);
      continue;
    }
    const std::string key = try_normalize_name(s.name);
    auto it = state_index.find(key);
    if (it == state_index.end()) {
      state_index.emplace(key, out.states_rows.size());
      out.states_rows.push_back(s);
      continue;
    }
    auto& kept = out.states_rows[it->second];
    if (s.kind == RowKind::kComposite) kept.kind = RowKind::kComposite;
    if (!kept.parent && s.parent) {
      kept.parent = s.parent;
      kept.region = s.region;
    }
  }

  // Transitions: collapse on (source, target, event, guard).
  out.transition_rows.clear();
  using FullKey = std::tuple<std::string, std::string, std::string, std::string, bool>;
  std::map<FullKey, std::size_t> index;
  std::map<TransitionKey, std::set<std::optional<std::string>>> guards_by_endpoints;
  for (const auto& t : partial.transition_rows) {
    auto [s, d, e] = endpoint_key(t);
    std::optional<std::string> g;
    if (t.guard) g = canonical_annotation(*t.guard);
    guards_by_endpoints[{s, d, e}].insert(g);
    FullKey key{s, d, e, g.value_or(""), g.has_value()};
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, out.transition_rows.size());
      out.transition_rows.push_back(t);
      continue;
    }
    auto& kept = out.transition_rows[it->second];
    bool changed = false;
    for (const auto& a : t.actions) {
      const std::string ca = canonical_annotation(a);
      bool present = std::any_of(kept.actions.begin(), kept.actions.end(),
                                 [&](const std::string& x) {
                                   return canonical_annotation(x) == ca;
                                 });
      if (!present) {
        kept.actions.push_back(a);
        changed = true;
      }
    }
    if (changed || kept.actions.size() != t.actions.size()) {
      warn("actions", "conflicting actions merged for " + describe(kept));
    }
  }
  for (const auto& [k, guards] : guards_by_endpoints) {
    if (guards.size() > 1) {
      warn("guards", "transition " + std::get<0>(k) + " -> " + std::get<1>(k) +
                         " on '" + std::get<2>(k) + "' has " +
                         std::to_string(guards.size()) + " guard variants; all kept");
    }
  }

  // Structure: collapse on (composite, region), union substates.
  out.structure_rows.clear();
  std::map<std::pair<std::string, std::string>, std::size_t> sindex;
  for (const auto& r : partial.structure_rows) {
    std::pair key{try_normalize_name(r.composite), try_normalize_name(r.region)};
    auto it = sindex.find(key);
    if (it == sindex.end()) {
      sindex.emplace(key, out.structure_rows.size());
      out.structure_rows.push_back(r);
      continue;
    }
    auto& kept = out.structure_rows[it->second];
    kept.has_history = kept.has_history || r.has_history;
    for (const auto& sub : r.substates) {
      const std::string sk = try_normalize_name(sub);
      bool present = std::any_of(kept.substates.begin(), kept.substates.end(),
                                 [&](const std::string& x) {
                                   return try_normalize_name(x) == sk;
                                 });
      if (!present) kept.substates.push_back(sub);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finalize

namespace {

struct Slot {
  std::string display;
  bool declared_composite = false;
  std::optional<std::string> parent;  // key
  std::string region;                 // raw region name, "" = unnamed
  std::size_t order = 0;
};

std::string sanitize_guard(std::string_view g) {
  std::string s = text::collapse_space(g);
  for (auto& c : s) {
    if (c == '[') c = '(';
    if (c == ']') c = ')';
  }
  return s;
}

std::string sanitize_action(std::string_view a) {
  std::string s = text::collapse_space(a);
  for (auto& c : s) {
    if (c == '{') c = '(';
    if (c == '}') c = ')';
    if (c == ';') c = ',';
  }
  return s;
}

class TreeBuilder {
 public:
  TreeBuilder(WarningLog* log, std::string step_states, std::string step_structure)
      : log_(log),
        states_step_(std::move(step_states)),
        structure_step_(std::move(step_structure)) {}

  // Registers a state name; returns its key or "" if unusable.
  std::string declare(const std::string& raw, const std::string& step,
                      const std::string& component) {
    const std::string ident = to_identifier(raw);
    if (ident.empty()) {
      warn(step, component, "unusable state name '" + raw + "' dropped");
      return "";
    }
    const std::string key = try_normalize_name(ident);
    if (!slots_.contains(key)) {
      Slot s;
      s.display = ident;
      s.order = next_order_++;
      slots_.emplace(key, std::move(s));
      order_.push_back(key);
    }
    return key;
  }

  bool known(const std::string& key) const { return slots_.contains(key); }
  Slot& slot(const std::string& key) { return slots_.at(key); }

  bool would_cycle(const std::string& child, const std::string& parent) const {
    std::string cur = parent;
    std::set<std::string> visited;
    while (true) {
      if (cur == child) return true;
      if (!visited.insert(cur).second) return true;
      auto it = slots_.find(cur);
      if (it == slots_.end() || !it->second.parent) return false;
      cur = *it->second.parent;
    }
  }

  void claim(const std::string& child, const std::string& parent,
             const std::string& region, const std::string& step,
             const std::string& component) {
    if (child.empty() || parent.empty()) return;
    auto& s = slot(child);
    if (child == parent) {
      warn(step, component, "state " + s.display + " listed inside itself; ignored");
      return;
    }
    if (s.parent) {
      if (*s.parent != parent) {
        warn(step, component,
             "state " + s.display + " claimed by " + slot(parent).display +
                 " but already inside " + slot(*s.parent).display + "; keeping first");
      } else if (try_normalize_name(s.region) != try_normalize_name(region)) {
        warn(step, component,
             "state " + s.display + " listed in two regions of " +
                 slot(parent).display + "; keeping first");
      }
      return;
    }
    if (would_cycle(child, parent)) {
      warn(step, component,
           "nesting " + s.display + " inside " + slot(parent).display +
               " would form a cycle; ignored");
      return;
    }
    s.parent = parent;
    s.region = region;
    children_order_.push_back(child);
  }

  std::vector<StateNode> build() {
    // Group children per parent, per region (first-appearance order).
    std::map<std::string, std::vector<std::pair<std::string, std::vector<std::string>>>> regions;
    for (const auto& child : children_order_) {
      const auto& s = slots_.at(child);
      auto& list = regions[*s.parent];
      std::string rkey = try_normalize_name(s.region);
      auto it = std::find_if(list.begin(), list.end(), [&](const auto& r) {
        return try_normalize_name(r.first) == rkey;
      });
      if (rkey.empty() && !list.empty() && it == list.end()) it = list.begin();
      if (it == list.end()) {
        list.push_back({s.region, {}});
        it = list.end() - 1;
      }
      it->second.push_back(child);
    }
    std::vector<StateNode> roots;
    for (const auto& key : order_) {
      if (!slots_.at(key).parent) roots.push_back(make(key, regions));
    }
    return roots;
  }

 private:
  StateNode make(const std::string& key,
                 const std::map<std::string, std::vector<std::pair<std::string, std::vector<std::string>>>>& regions) {
    const auto& s = slots_.at(key);
    StateNode node;
    node.name = s.display;
    auto it = regions.find(key);
    if (it == regions.end()) {
      if (s.declared_composite) {
        warn(structure_step_, "hierarchical",
             "composite " + s.display + " has no substates; kept as simple state");
      }
      return node;
    }
    node.kind = StateKind::kComposite;
    std::set<std::string> used_names;
    for (const auto& [rname, members] : it->second) {
      Region r;
      std::string ident = to_identifier(rname);
      if (!ident.empty() && used_names.insert(try_normalize_name(ident)).second) {
        r.name = ident;
      }
      for (const auto& m : members) r.substates.push_back(make(m, regions));
      r.initial = r.substates.front().name;
      node.regions.push_back(std::move(r));
    }
    // Auto-name unnamed regions without colliding with given names.
    std::size_t n = 1;
    for (auto& r : node.regions) {
      if (!r.name.empty()) continue;
      while (used_names.contains("r" + std::to_string(n))) ++n;
      r.name = "r" + std::to_string(n);
      used_names.insert(r.name);
    }
    return node;
  }

  void warn(const std::string& step, const std::string& component,
            const std::string& msg) {
    if (log_) log_->push_back({step, component, msg});
  }

  WarningLog* log_;
  std::string states_step_;
  std::string structure_step_;
  std::map<std::string, Slot> slots_;
  std::vector<std::string> order_;
  std::vector<std::string> children_order_;
  std::size_t next_order_ = 0;
};

std::string provenance_or(const PartialModel& p, Component c, const char* fallback) {
  auto it = p.provenance.find(c);
  return it == p.provenance.end() ? fallback : it->second;
}

}  // namespace

StateMachine finalize(const PartialModel& partial, std::string_view machine_name,
                      WarningLog* log) {
  auto warn = [&](const std::string& step, const std::string& component,
                  const std::string& msg) {
    if (log) log->push_back({step, component, msg});
  };
  const std::string states_step = provenance_or(partial, Component::kStates, "finalize");
  const std::string structure_step =
      provenance_or(partial, Component::kHierarchical, "finalize");
  const std::string transitions_step =
      provenance_or(partial, Component::kTransitions, "finalize");
  const std::string history_step = provenance_or(partial, Component::kHistory, "finalize");

  TreeBuilder tree(log, states_step, structure_step);

  // Declare states in document order.
  for (const auto& s : partial.states_rows) {
    if (s.kind == RowKind::kHistoryMarker) continue;
    const std::string key = tree.declare(s.name, states_step, "states");
    if (!key.empty() && s.kind == RowKind::kComposite) {
      tree.slot(key).declared_composite = true;
    }
  }
  for (const auto& r : partial.structure_rows) {
    const std::string key = tree.declare(r.composite, structure_step, "hierarchical");
    if (!key.empty()) tree.slot(key).declared_composite = true;
    for (const auto& sub : r.substates) tree.declare(sub, structure_step, "hierarchical");
  }
  for (const auto& s : partial.states_rows) {
    if (s.kind == RowKind::kHistoryMarker || !s.parent) continue;
    tree.declare(*s.parent, states_step, "states");
  }

  // Structure rows win; then state-row parents fill the gaps.
  for (const auto& r : partial.structure_rows) {
    const std::string parent = try_normalize_name(to_identifier(r.composite));
    if (!tree.known(parent)) continue;
    for (const auto& sub : r.substates) {
      const std::string child = try_normalize_name(to_identifier(sub));
      if (tree.known(child)) tree.claim(child, parent, r.region, structure_step, "hierarchical");
    }
  }
  for (const auto& s : partial.states_rows) {
    if (s.kind == RowKind::kHistoryMarker || !s.parent) continue;
    const std::string child = try_normalize_name(to_identifier(s.name));
    const std::string parent = try_normalize_name(to_identifier(*s.parent));
    if (tree.known(child) && tree.known(parent)) {
      tree.claim(child, parent, s.region.value_or(""), states_step, "states");
    }
  }

  StateMachine sm;
  sm.name = to_identifier(machine_name);
  if (sm.name.empty()) sm.name = "sm";
  sm.root_states = tree.build();
  if (sm.root_states.empty()) throw FinalizeFailed("no states survived post-processing");

  // History.
  std::set<std::string> history;
  for (const auto& r : partial.structure_rows) {
    if (r.has_history) history.insert(try_normalize_name(to_identifier(r.composite)));
  }
  for (const auto& s : partial.states_rows) {
    if (s.kind == RowKind::kHistoryMarker && s.parent) {
      history.insert(try_normalize_name(to_identifier(*s.parent)));
    }
  }
  for (const auto& key : history) {
    StateNode* node = key.empty() ? nullptr : find_state(sm, key);
    if (node == nullptr) {
      warn(history_step, "history", "history for unknown state '" + key + "' dropped");
    } else if (!node->is_composite()) {
      warn(history_step, "history",
           "history on simple state " + node->name + " dropped");
    } else {
      node->has_history = true;
    }
  }

  // Transitions.
  std::map<std::string, std::string> event_spelling;
  for (const auto& row : partial.transition_rows) {
    const StateNode* src = find_state(sm, to_identifier(row.source));
    const StateNode* dst = find_state(sm, to_identifier(row.target));
    if (src == nullptr || dst == nullptr) {
      warn(transitions_step, "transitions",
           "dropped transition " + describe(row) + ": unknown " +
               (src == nullptr ? "source '" + row.source + "'"
                               : "target '" + row.target + "'"));
      continue;
    }
    Transition t;
    t.source = src->name;
    t.target = dst->name;
    if (row.event) {
      std::string ev = to_identifier(*row.event);
      if (!ev.empty()) {
        auto [it, inserted] = event_spelling.emplace(try_normalize_name(ev), ev);
        t.event = it->second;
      }
    }
    if (row.guard) {
      std::string g = sanitize_guard(*row.guard);
      if (!g.empty()) t.guard = std::move(g);
    }
    for (const auto& a : row.actions) {
      std::string s = sanitize_action(a);
      if (!s.empty()) t.actions.push_back(std::move(s));
    }
    sm.transitions.push_back(std::move(t));
  }

  finalize_structure(sm);
  require_valid(sm);
  return sm;
}

}  // namespace smforge
