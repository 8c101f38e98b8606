#include "fixture_responder.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "smforge/tables.hpp"
#include "smforge/umple.hpp"

namespace smforge::fixtures {

namespace {

enum class Part { kStates, kTransitions, kStructure };

std::string table_of(const PartialModel& p, Part part) {
  const std::string all = emit_partial_tables(p);
  std::size_t begin = 0;
  for (int i = 0; i < static_cast<int>(part); ++i) begin = all.find("</table>", begin) + 8;
  begin = all.find("<table>", begin);
  const std::size_t end = all.find("</table>", begin) + 8;
  return all.substr(begin, end - begin) + "\n";
}

void rename_state(std::vector<StateNode>& states, const std::string& from, const std::string& to) {
  for (auto& s : states) {
    if (s.name == from) s.name = to;
    for (auto& r : s.regions) {
      if (r.initial == from) r.initial = to;
      rename_state(r.substates, from, to);
    }
  }
}

void clear_history(std::vector<StateNode>& states, std::vector<std::string>* notes) {
  for (auto& s : states) {
    if (s.has_history) {
      s.has_history = false;
      if (notes) notes->push_back("history of " + s.name + " dropped");
      return;
    }
    for (auto& r : s.regions) clear_history(r.substates, notes);
  }
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::uint64_t seed_of(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string classify_step(std::string_view prompt) {
  const std::string_view head = prompt.substr(0, std::min<std::size_t>(prompt.size(), 800));
  if (head.find("and the Umple modeling language") != std::string_view::npos) return "baseline";
  const bool by_event = head.find("one event at a time") != std::string_view::npos;
  const bool by_step = head.find("step by step") != std::string_view::npos;
  if (by_step) {
    const auto at = head.find("\nStep ");
    if (at == std::string_view::npos || at + 6 >= head.size()) return "";
    return std::string("S") + head[at + 6];
  }
  if (!by_event) return "";
  if (head.find("\nStep 1.") != std::string_view::npos) return "E1";
  if (head.find("\nStep 2.") != std::string_view::npos) return "E2";
  if (auto at = head.find("Consider the event \""); at != std::string_view::npos) {
    const auto start = at + 20;
    const auto end = head.find('"', start);
    return "E3:" + std::string(head.substr(start, end - start));
  }
  if (head.find("\nGroup states") != std::string_view::npos) return "E4";
  if (head.find("\nFind groups of states") != std::string_view::npos) return "E5";
  if (head.find("\nDecide which superstates") != std::string_view::npos) return "E6";
  return "";
}

StateMachine perturb(const Scenario& scenario, std::uint64_t seed, std::vector<std::string>* notes) {
  std::mt19937_64 rng(seed);
  StateMachine sm = scenario.truth;
  auto note = [&](std::string s) {
    if (notes) notes->push_back(std::move(s));
  };

  for (const auto& a : scenario.alias_pairs) {
    if (!chance(rng, 0.6)) continue;
    switch (a.space) {
      case AliasSpace::kState: {
        const StateNode* node = find_state(sm, a.truth);
        if (node == nullptr || find_state(sm, a.generated) != nullptr) break;
        const std::string from = node->name;
        rename_state(sm.root_states, from, a.generated);
        for (auto& t : sm.transitions) {
          if (t.source == from) t.source = a.generated;
          if (t.target == from) t.target = a.generated;
        }
        note("state " + from + " named " + a.generated);
        break;
      }
      case AliasSpace::kEvent:
        for (auto& t : sm.transitions) {
          if (t.event && try_normalize_name(*t.event) == try_normalize_name(a.truth)) {
            t.event = a.generated;
          }
        }
        note("event " + a.truth + " named " + a.generated);
        break;
      case AliasSpace::kGuard:
        for (auto& t : sm.transitions) {
          if (t.guard && canonical_annotation(*t.guard) == canonical_annotation(a.truth)) {
            t.guard = a.generated;
          }
        }
        note("guard " + a.truth + " written " + a.generated);
        break;
      case AliasSpace::kAction:
        for (auto& t : sm.transitions) {
          for (auto& act : t.actions) {
            if (canonical_annotation(act) == canonical_annotation(a.truth)) act = a.generated;
          }
        }
        note("action " + a.truth + " written " + a.generated);
        break;
    }
  }

  if (!sm.transitions.empty() && chance(rng, 0.5)) {
    const auto i = pick(rng, sm.transitions.size());
    note("transition " + sm.transitions[i].source + " -> " + sm.transitions[i].target + " missing");
    sm.transitions.erase(sm.transitions.begin() + static_cast<std::ptrdiff_t>(i));
  }
  std::vector<Transition*> guarded;
  for (auto& t : sm.transitions) {
    if (t.guard) guarded.push_back(&t);
  }
  if (!guarded.empty() && chance(rng, 0.4)) {
    Transition* t = guarded[pick(rng, guarded.size())];
    note("guard [" + *t->guard + "] missing");
    t->guard.reset();
  }
  std::vector<std::string*> actions;
  for (auto& t : sm.transitions) {
    for (auto& a : t.actions) actions.push_back(&a);
  }
  if (!actions.empty() && chance(rng, 0.3)) {
    std::string* a = actions[pick(rng, actions.size())];
    note("action " + *a + " written notifyUser");
    *a = "notifyUser";
  }
  if (chance(rng, 0.3)) clear_history(sm.root_states, notes);
  if (chance(rng, 0.5) && find_state(sm, "diagnostics") == nullptr) {
    StateNode extra;
    extra.name = "Diagnostics";
    const std::string from = sm.root_states.front().name;
    sm.root_states.push_back(extra);
    sm.transitions.push_back({from, "Diagnostics", "selfTest", "serviceMode", {"logStatus"}});
    sm.transitions.push_back({"Diagnostics", from, "exitTest", std::nullopt, {}});
    note("extra state Diagnostics");
  }
  finalize_structure(sm);
  require_valid(sm);
  return sm;
}

std::string answer(const StateMachine& gen, std::string_view step) {
  const PartialModel full = partial_from_machine(gen);
  auto structure = [&](auto keep) {
    std::map<std::string, std::size_t> regions;
    for (const auto& r : full.structure_rows) ++regions[r.composite];
    PartialModel p;
    for (const auto& r : full.structure_rows) {
      if (keep(regions[r.composite])) p.structure_rows.push_back(r);
    }
    return p;
  };

  if (step == "baseline") {
    return "Here is the state machine.\n\n```umple\n" + emit_umple(gen) + "```\n";
  }
  if (step == "S1" || step == "E1") {
    return "States:\n" + table_of(full, Part::kStates);
  }
  if (step == "S2" || step == "E5") {
    PartialModel p = structure([](std::size_t n) { return n >= 2; });
    if (p.structure_rows.empty()) return "none";
    return table_of(p, Part::kStructure);
  }
  if (step == "S3") {
    PartialModel p = full;
    for (auto& t : p.transition_rows) t.actions.clear();
    return table_of(p, Part::kTransitions);
  }
  if (step == "S4") return table_of(full, Part::kTransitions);
  if (step == "S5" || step == "E4") {
    PartialModel p = structure([](std::size_t n) { return n == 1; });
    if (p.structure_rows.empty()) return "There are no superstates.";
    return table_of(p, Part::kStructure);
  }
  if (step == "S6" || step == "E6") return table_of(full, Part::kStructure);
  if (step == "E2") {
    return emit_events_table(std::vector<std::string>(gen.events.begin(), gen.events.end()));
  }
  if (step.starts_with("E3:")) {
    const std::string ev = try_normalize_name(step.substr(3));
    PartialModel p;
    for (const auto& t : full.transition_rows) {
      if (t.event && try_normalize_name(*t.event) == ev) p.transition_rows.push_back(t);
    }
    return table_of(p, Part::kTransitions);
  }
  return "I am not sure what is being asked.";
}

BackendPtr responder(StateMachine gen, std::string corrupt_step) {
  return std::make_shared<FunctionBackend>(
      [gen = std::move(gen), corrupt_step = std::move(corrupt_step)](const CompletionRequest& req) {
        const std::string step = classify_step(req.messages.back().content);
        CompletionResponse resp;
        if (!corrupt_step.empty() && step == corrupt_step) {
          resp.content = "Here are the actions:\n<table><tr><th>Source</th><th>Tar";
          resp.finish = Finish::kLength;
          resp.usage = {900, req.max_tokens};
          return resp;
        }
        resp.content = answer(gen, step);
        resp.usage = {static_cast<int>(req.messages.back().content.size() / 4),
                      static_cast<int>(resp.content.size() / 4)};
        return resp;
      });
}

}  // namespace smforge::fixtures
