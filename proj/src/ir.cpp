#include "smforge/ir.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace smforge {

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out = "invalid state machine";
  for (const auto& v : violations) {
    out += "; " + v.to_string();
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

std::string to_string(const ComponentCounts& c) {
  std::ostringstream os;
  os << "states=" << c.states << " transitions=" << c.transitions
     << " guards=" << c.guards << " actions=" << c.actions
     << " hierarchical=" << c.hierarchical_states
     << " parallel=" << c.parallel_regions << " history=" << c.history_states;
  return os.str();
}

std::string_view component_key(Component c) {
  switch (c) {
    case Component::kStates: return "states";
    case Component::kTransitions: return "transitions";
    case Component::kGuards: return "guards";
    case Component::kActions: return "actions";
    case Component::kHierarchical: return "hierarchical";
    case Component::kParallel: return "parallel";
    case Component::kHistory: return "history";
  }
  return "";
}

std::string_view component_label(Component c) {
  switch (c) {
    case Component::kStates: return "States";
    case Component::kTransitions: return "Transitions";
    case Component::kGuards: return "Guards";
    case Component::kActions: return "Actions";
    case Component::kHierarchical: return "Hierarchical states";
    case Component::kParallel: return "Parallel regions";
    case Component::kHistory: return "History states";
  }
  return "";
}

std::optional<Component> component_from_key(std::string_view key) {
  for (Component c : kAllComponents) {
    if (component_key(c) == key) return c;
  }
  return std::nullopt;
}

std::size_t count_of(const ComponentCounts& counts, Component c) {
  switch (c) {
    case Component::kStates: return counts.states;
    case Component::kTransitions: return counts.transitions;
    case Component::kGuards: return counts.guards;
    case Component::kActions: return counts.actions;
    case Component::kHierarchical: return counts.hierarchical_states;
    case Component::kParallel: return counts.parallel_regions;
    case Component::kHistory: return counts.history_states;
  }
  return 0;
}

std::string try_normalize_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char ch : raw) {
    if (std::isalnum(ch)) out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

std::string normalize_name(std::string_view raw) {
  std::string out = try_normalize_name(raw);
  if (out.empty()) throw NameUnusable(std::string(raw));
  return out;
}

std::string to_identifier(std::string_view raw) {
  std::string out;
  bool pending_sep = false;
  for (unsigned char ch : raw) {
    if (std::isalnum(ch) || ch == '_') {
      if (pending_sep && !out.empty()) out.push_back('_');
      pending_sep = false;
      out.push_back(static_cast<char>(ch));
    } else {
      pending_sep = true;
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  std::size_t lead = 0;
  while (lead < out.size() && out[lead] == '_') ++lead;
  out.erase(0, lead);
  if (try_normalize_name(out).empty()) return "";
  if (std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(0, "_");
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto first = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(first) || first == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char ch) {
    return std::isalnum(ch) || ch == '_';
  });
}

std::string canonical_annotation(std::string_view text) {
  std::string out;
  bool pending = false;
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(std::tolower(ch)));
  }
  while (!out.empty() && std::string_view(" .,;:!?").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

namespace {

void validate_states(const std::vector<StateNode>& states,
                     std::map<std::string, std::string>& seen,
                     std::vector<Violation>& out) {
  for (const auto& s : states) {
    if (!is_identifier(s.name)) {
      out.push_back({"invalid state name", "'" + s.name + "'"});
    }
    std::string key = try_normalize_name(s.name);
    if (!key.empty()) {
      auto [it, inserted] = seen.emplace(key, s.name);
      if (!inserted) {
        out.push_back({"duplicate state name", s.name + " vs " + it->second});
      }
    }
    if (s.kind == StateKind::kSimple) {
      if (!s.regions.empty()) {
        out.push_back({"simple state has regions", s.name});
      }
      if (s.has_history) {
        out.push_back({"history on simple state", s.name});
      }
    } else if (s.regions.empty()) {
      out.push_back({"composite state without regions", s.name});
    }
    for (const auto& r : s.regions) {
      const std::string where = s.name + "/" + r.name;
      if (r.substates.empty()) {
        out.push_back({"empty region", where});
        continue;
      }
      bool initial_found =
          std::any_of(r.substates.begin(), r.substates.end(),
                      [&](const StateNode& n) { return n.name == r.initial; });
      if (!initial_found) {
        out.push_back({"region initial not a substate",
                       where + " initial '" + r.initial + "'"});
      }
      validate_states(r.substates, seen, out);
    }
  }
}

}  // namespace

std::vector<Violation> validate(const StateMachine& sm) {
  std::vector<Violation> out;
  std::map<std::string, std::string> seen;
  validate_states(sm.root_states, seen, out);

  for (std::size_t i = 0; i < sm.transitions.size(); ++i) {
    const auto& t = sm.transitions[i];
    const std::string label = "transition #" + std::to_string(i + 1) + " " +
                              t.source + " -> " + t.target;
    if (t.source.empty()) {
      out.push_back({"empty source", label});
    } else if (!find_state(sm, t.source)) {
      out.push_back({"unknown source", label});
    }
    if (t.target.empty()) {
      out.push_back({"empty target", label});
    } else if (!find_state(sm, t.target)) {
      out.push_back({"unknown target", label});
    }
    if (t.event && !sm.events.contains(*t.event)) {
      out.push_back({"undeclared event", label + " on " + *t.event});
    }
    if (t.event && t.event->empty()) {
      out.push_back({"empty event", label});
    }
    if (t.guard && t.guard->empty()) {
      out.push_back({"empty guard", label});
    }
    for (const auto& a : t.actions) {
      if (a.empty()) out.push_back({"empty action", label});
    }
  }
  return out;
}

void require_valid(const StateMachine& sm) {
  auto violations = validate(sm);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

ComponentCounts component_counts(const StateMachine& sm) {
  require_valid(sm);
  ComponentCounts c;
  for_each_state(sm.root_states,
                 [&](const StateNode& s, const StateNode*, std::size_t) {
                   ++c.states;
                   if (!s.is_composite()) return;
                   ++c.hierarchical_states;
                   if (s.regions.size() >= 2) c.parallel_regions += s.regions.size();
                   if (s.has_history) ++c.history_states;
                 });
  c.transitions = sm.transitions.size();
  for (const auto& t : sm.transitions) {
    if (t.guard) ++c.guards;
    c.actions += t.actions.size();
  }
  return c;
}

namespace {

template <typename Node>
Node* find_in(std::vector<StateNode>& states, const std::string& key) {
  for (auto& s : states) {
    if (try_normalize_name(s.name) == key) return &s;
    for (auto& r : s.regions) {
      if (auto* hit = find_in<Node>(r.substates, key)) return hit;
    }
  }
  return nullptr;
}

}  // namespace

StateNode* find_state(StateMachine& sm, std::string_view canonical) {
  const std::string key = try_normalize_name(canonical);
  if (key.empty()) return nullptr;
  return find_in<StateNode>(sm.root_states, key);
}

const StateNode* find_state(const StateMachine& sm,
                            std::string_view canonical) {
  return find_state(const_cast<StateMachine&>(sm), canonical);
}

namespace {

void finalize_states(std::vector<StateNode>& states) {
  for (auto& s : states) {
    for (std::size_t r = 0; r < s.regions.size(); ++r) {
      auto& region = s.regions[r];
      if (region.name.empty()) region.name = "r" + std::to_string(r + 1);
      if (region.initial.empty() && !region.substates.empty()) {
        region.initial = region.substates.front().name;
      }
      finalize_states(region.substates);
    }
  }
}

// Region contents with the initial state rotated to the front, so regions
// that differ only in where the initial sits compare equal.
std::vector<const StateNode*> initial_first(const Region& r) {
  std::vector<const StateNode*> out;
  for (const auto& s : r.substates) {
    if (s.name == r.initial) out.push_back(&s);
  }
  for (const auto& s : r.substates) {
    if (s.name != r.initial) out.push_back(&s);
  }
  return out;
}

void diff_states(const std::vector<const StateNode*>& a,
                 const std::vector<const StateNode*>& b,
                 const std::string& where, std::ostringstream& os) {
  if (a.size() != b.size()) {
    os << where << ": " << a.size() << " vs " << b.size() << " states\n";
    return;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = *a[i];
    const auto& y = *b[i];
    if (x.name != y.name) {
      os << where << ": state '" << x.name << "' vs '" << y.name << "'\n";
      continue;
    }
    if (x.kind != y.kind) os << x.name << ": kind differs\n";
    if (x.has_history != y.has_history) os << x.name << ": history differs\n";
    if (x.regions.size() != y.regions.size()) {
      os << x.name << ": " << x.regions.size() << " vs " << y.regions.size()
         << " regions\n";
      continue;
    }
    for (std::size_t r = 0; r < x.regions.size(); ++r) {
      diff_states(initial_first(x.regions[r]), initial_first(y.regions[r]),
                  x.name + "/region" + std::to_string(r + 1), os);
    }
  }
}

std::vector<const StateNode*> pointers(const std::vector<StateNode>& states) {
  std::vector<const StateNode*> out;
  for (const auto& s : states) out.push_back(&s);
  return out;
}

}  // namespace

void finalize_structure(StateMachine& sm, bool recompute_events) {
  finalize_states(sm.root_states);
  if (recompute_events) {
    sm.events.clear();
    for (const auto& t : sm.transitions) {
      if (t.event) sm.events.insert(*t.event);
    }
  }
}

std::string describe_difference(const StateMachine& a, const StateMachine& b) {
  std::ostringstream os;
  if (a.name != b.name) {
    os << "machine name '" << a.name << "' vs '" << b.name << "'\n";
  }
  diff_states(pointers(a.root_states), pointers(b.root_states), "root", os);
  auto ta = a.transitions;
  auto tb = b.transitions;
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  if (ta != tb) {
    os << "transitions differ (" << ta.size() << " vs " << tb.size() << ")\n";
    for (const auto& t : ta) {
      if (std::find(tb.begin(), tb.end(), t) == tb.end()) {
        os << "  only left: " << t.source << " -> " << t.target << "\n";
      }
    }
    for (const auto& t : tb) {
      if (std::find(ta.begin(), ta.end(), t) == ta.end()) {
        os << "  only right: " << t.source << " -> " << t.target << "\n";
      }
    }
  }
  if (a.events != b.events) os << "event sets differ\n";
  return os.str();
}

bool equivalent(const StateMachine& a, const StateMachine& b) {
  return describe_difference(a, b).empty();
}

}  // namespace smforge
