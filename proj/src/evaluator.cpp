#include "smforge/evaluator.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "assignment.hpp"

namespace smforge {

// ---------------------------------------------------------------------------
// AliasMap

std::string_view alias_space_key(AliasSpace space) {
  switch (space) {
    case AliasSpace::kState: return "state";
    case AliasSpace::kEvent: return "event";
    case AliasSpace::kGuard: return "guard";
    case AliasSpace::kAction: return "action";
  }
  return "";
}

std::optional<AliasSpace> alias_space_from_key(std::string_view key) {
  for (auto s : {AliasSpace::kState, AliasSpace::kEvent, AliasSpace::kGuard,
                 AliasSpace::kAction}) {
    if (alias_space_key(s) == key) return s;
  }
  return std::nullopt;
}

std::string AliasMap::canonical(AliasSpace space, std::string_view raw) {
  if (space == AliasSpace::kState || space == AliasSpace::kEvent) {
    return try_normalize_name(raw);
  }
  return canonical_annotation(raw);
}

void AliasMap::add(AliasSpace space, std::string_view generated, std::string_view truth) {
  const auto idx = static_cast<std::size_t>(space);
  const std::string g = canonical(space, generated);
  const std::string t = canonical(space, truth);
  if (g.empty() || t.empty()) {
    throw AliasConflict("empty alias in " + std::string(alias_space_key(space)) + " space");
  }
  auto fit = forward_[idx].find(g);
  if (fit != forward_[idx].end() && fit->second != t) {
    throw AliasConflict(std::string(alias_space_key(space)) + " alias '" + g +
                        "' maps to both '" + fit->second + "' and '" + t + "'");
  }
  auto bit = backward_[idx].find(t);
  if (bit != backward_[idx].end() && bit->second != g) {
    throw AliasConflict(std::string(alias_space_key(space)) + " alias target '" + t +
                        "' claimed by both '" + bit->second + "' and '" + g + "'");
  }
  forward_[idx][g] = t;
  backward_[idx][t] = g;
}

std::optional<std::string> AliasMap::truth_for(AliasSpace space,
                                               std::string_view generated) const {
  const auto& m = forward_[static_cast<std::size_t>(space)];
  auto it = m.find(canonical(space, generated));
  if (it == m.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> AliasMap::generated_for(AliasSpace space,
                                                   std::string_view truth) const {
  const auto& m = backward_[static_cast<std::size_t>(space)];
  auto it = m.find(canonical(space, truth));
  if (it == m.end()) return std::nullopt;
  return it->second;
}

AliasMap AliasMap::inverted() const {
  AliasMap out;
  out.forward_ = backward_;
  out.backward_ = forward_;
  return out;
}

bool AliasMap::empty() const { return size() == 0; }

std::size_t AliasMap::size() const {
  std::size_t n = 0;
  for (const auto& m : forward_) n += m.size();
  return n;
}

// ---------------------------------------------------------------------------
// States

namespace {

struct StateInfo {
  std::string key;
  const StateNode* node;
};

std::vector<StateInfo> sorted_states(const StateMachine& sm) {
  std::vector<StateInfo> out;
  for_each_state(sm.root_states, [&](const StateNode& s, const StateNode*, std::size_t) {
    out.push_back({try_normalize_name(s.name), &s});
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const StateInfo& a, const StateInfo& b) { return a.key < b.key; });
  return out;
}

void finish_counts(ComponentMatch& m) {
  m.tp = m.matched.size();
  m.fp = m.false_positives.size();
  m.fn = m.false_negatives.size();
}

}  // namespace

StateMatching match_states(const StateMachine& gen, const StateMachine& truth,
                           const AliasMap& aliases) {
  const auto gs = sorted_states(gen);
  const auto ts = sorted_states(truth);
  std::map<std::string, const StateNode*> gen_by_key;
  std::map<std::string, const StateNode*> truth_by_key;
  for (const auto& s : gs) gen_by_key.emplace(s.key, s.node);
  for (const auto& s : ts) truth_by_key.emplace(s.key, s.node);

  StateMatching result;
  std::set<std::string> bound_truth;

  // Explicit aliases first.
  for (const auto& g : gs) {
    auto alias = aliases.truth_for(AliasSpace::kState, g.key);
    if (!alias || *alias == g.key || !truth_by_key.contains(*alias)) continue;
    if (truth_by_key.contains(g.key)) {
      throw AliasConflict("generated state '" + g.node->name + "' is aliased to '" +
                          *alias + "' but also names a ground-truth state");
    }
    if (gen_by_key.contains(*alias)) {
      throw AliasConflict("ground-truth state '" + *alias + "' is the alias of '" +
                          g.node->name + "' and also a generated state name");
    }
    result.mapping[g.key] = *alias;
    bound_truth.insert(*alias);
  }
  // Then exact normalized names.
  for (const auto& g : gs) {
    if (result.mapping.contains(g.key)) continue;
    if (truth_by_key.contains(g.key) && !bound_truth.contains(g.key)) {
      result.mapping[g.key] = g.key;
      bound_truth.insert(g.key);
    }
  }

  for (const auto& g : gs) {
    auto it = result.mapping.find(g.key);
    if (it == result.mapping.end()) {
      result.states.false_positives.push_back(g.node->name);
    } else {
      result.states.matched.push_back(g.node->name + " => " + truth_by_key.at(it->second)->name);
    }
  }
  for (const auto& t : ts) {
    if (!bound_truth.contains(t.key)) result.states.false_negatives.push_back(t.node->name);
  }
  finish_counts(result.states);
  return result;
}

// ---------------------------------------------------------------------------
// Transitions, guards, actions

namespace {

std::string describe(const Transition& t) {
  std::string s = t.source + " -> " + t.target;
  if (t.event) s += " on " + *t.event;
  return s;
}

std::string event_key(const Transition& t) {
  return t.event ? try_normalize_name(*t.event) : std::string();
}

std::string mapped_event_key(const Transition& t, const AliasMap& aliases) {
  if (!t.event) return "";
  auto alias = aliases.truth_for(AliasSpace::kEvent, *t.event);
  return alias ? *alias : try_normalize_name(*t.event);
}

std::string mapped_annotation(AliasSpace space, const std::string& raw,
                              const AliasMap& aliases) {
  auto alias = aliases.truth_for(space, raw);
  return alias ? *alias : canonical_annotation(raw);
}

bool guards_match(const Transition& g, const Transition& t, const AliasMap& aliases) {
  if (!g.guard || !t.guard) return false;
  return mapped_annotation(AliasSpace::kGuard, *g.guard, aliases) ==
         canonical_annotation(*t.guard);
}

// Multiset intersection of action lists, by canonical form.
std::size_t action_overlap(const Transition& g, const Transition& t,
                           const AliasMap& aliases) {
  std::map<std::string, int> pool;
  for (const auto& a : t.actions) ++pool[canonical_annotation(a)];
  std::size_t hits = 0;
  for (const auto& a : g.actions) {
    auto it = pool.find(mapped_annotation(AliasSpace::kAction, a, aliases));
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

using ClassKey = std::tuple<std::string, std::string, std::string>;

}  // namespace

DependentMatch match_dependents(const StateMachine& gen, const StateMachine& truth,
                                const StateMapping& mapping, const AliasMap& aliases) {
  DependentMatch out;
  auto& tm = out.transitions;
  auto& gm = out.guards;
  auto& am = out.actions;

  auto fp_all = [&](const Transition& t, const char* why) {
    tm.false_positives.push_back(describe(t) + why);
    if (t.guard) gm.false_positives.push_back(*t.guard + " (on " + describe(t) + ")");
    for (const auto& a : t.actions) am.false_positives.push_back(a + " (on " + describe(t) + ")");
  };
  auto fn_all = [&](const Transition& t) {
    tm.false_negatives.push_back(describe(t));
    if (t.guard) gm.false_negatives.push_back(*t.guard + " (on " + describe(t) + ")");
    for (const auto& a : t.actions) am.false_negatives.push_back(a + " (on " + describe(t) + ")");
  };

  std::map<ClassKey, std::vector<std::size_t>> gen_classes;
  std::map<ClassKey, std::vector<std::size_t>> truth_classes;
  for (std::size_t i = 0; i < gen.transitions.size(); ++i) {
    const auto& t = gen.transitions[i];
    auto src = mapping.find(try_normalize_name(t.source));
    auto dst = mapping.find(try_normalize_name(t.target));
    if (src == mapping.end() || dst == mapping.end()) {
      fp_all(t, " (unmatched state)");
      continue;
    }
    gen_classes[{src->second, dst->second, mapped_event_key(t, aliases)}].push_back(i);
  }
  for (std::size_t j = 0; j < truth.transitions.size(); ++j) {
    const auto& t = truth.transitions[j];
    truth_classes[{try_normalize_name(t.source), try_normalize_name(t.target), event_key(t)}]
        .push_back(j);
  }

  std::set<ClassKey> keys;
  for (const auto& [k, _] : gen_classes) keys.insert(k);
  for (const auto& [k, _] : truth_classes) keys.insert(k);

  for (const auto& key : keys) {
    static const std::vector<std::size_t> kNone;
    auto git = gen_classes.find(key);
    auto tit = truth_classes.find(key);
    const auto& gi = git == gen_classes.end() ? kNone : git->second;
    const auto& ti = tit == truth_classes.end() ? kNone : tit->second;

    std::vector<int> assign(gi.size(), -1);
    if (!gi.empty() && !ti.empty()) {
      std::int64_t action_bound = 1;
      for (auto i : gi) action_bound += static_cast<std::int64_t>(gen.transitions[i].actions.size());
      const std::int64_t guard_weight = action_bound;
      const std::int64_t pair_weight =
          guard_weight * static_cast<std::int64_t>(std::min(gi.size(), ti.size()) + 1) +
          action_bound;
      std::vector<std::vector<std::int64_t>> w(gi.size(), std::vector<std::int64_t>(ti.size()));
      for (std::size_t a = 0; a < gi.size(); ++a) {
        for (std::size_t b = 0; b < ti.size(); ++b) {
          const auto& g = gen.transitions[gi[a]];
          const auto& t = truth.transitions[ti[b]];
          w[a][b] = pair_weight +
                    (guards_match(g, t, aliases) ? guard_weight : 0) +
                    static_cast<std::int64_t>(action_overlap(g, t, aliases));
        }
      }
      assign = detail::max_weight_assignment(w);
    }

    std::vector<bool> truth_used(ti.size(), false);
    for (std::size_t a = 0; a < gi.size(); ++a) {
      const auto& g = gen.transitions[gi[a]];
      if (assign[a] < 0) {
        fp_all(g, " (no counterpart)");
        continue;
      }
      truth_used[static_cast<std::size_t>(assign[a])] = true;
      const auto& t = truth.transitions[ti[static_cast<std::size_t>(assign[a])]];
      const std::string pair = describe(g) + " => " + describe(t);
      tm.matched.push_back(pair);

      if (guards_match(g, t, aliases)) {
        gm.matched.push_back(*g.guard + " => " + *t.guard);
      } else {
        if (g.guard) gm.false_positives.push_back(*g.guard + " (on " + describe(g) + ")");
        if (t.guard) gm.false_negatives.push_back(*t.guard + " (on " + describe(t) + ")");
      }

      std::vector<bool> used(t.actions.size(), false);
      for (const auto& ga : g.actions) {
        const std::string key = mapped_annotation(AliasSpace::kAction, ga, aliases);
        bool hit = false;
        for (std::size_t k = 0; k < t.actions.size(); ++k) {
          if (!used[k] && canonical_annotation(t.actions[k]) == key) {
            used[k] = true;
            am.matched.push_back(ga + " => " + t.actions[k]);
            hit = true;
            break;
          }
        }
        if (!hit) am.false_positives.push_back(ga + " (on " + describe(g) + ")");
      }
      for (std::size_t k = 0; k < t.actions.size(); ++k) {
        if (!used[k]) am.false_negatives.push_back(t.actions[k] + " (on " + describe(t) + ")");
      }
    }
    for (std::size_t b = 0; b < ti.size(); ++b) {
      if (!truth_used[b]) fn_all(truth.transitions[ti[b]]);
    }
  }

  finish_counts(tm);
  finish_counts(gm);
  finish_counts(am);
  return out;
}

// ---------------------------------------------------------------------------
// Composite structure

namespace {

struct CompositeInfo {
  std::string key;
  const StateNode* node;
};

std::vector<CompositeInfo> sorted_composites(const StateMachine& sm) {
  std::vector<CompositeInfo> out;
  for_each_state(sm.root_states, [&](const StateNode& s, const StateNode*, std::size_t) {
    if (s.is_composite()) out.push_back({try_normalize_name(s.name), &s});
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.key < b.key; });
  return out;
}

std::set<std::string> substate_keys(const Region& r) {
  std::set<std::string> out;
  for (const auto& s : r.substates) out.insert(try_normalize_name(s.name));
  return out;
}

std::set<std::string> direct_substates(const StateNode& n) {
  std::set<std::string> out;
  for (const auto& r : n.regions) {
    auto keys = substate_keys(r);
    out.insert(keys.begin(), keys.end());
  }
  return out;
}

// Image of a generated key set under the mapping; nullopt if any is unmapped.
std::optional<std::set<std::string>> image(const std::set<std::string>& keys,
                                           const StateMapping& mapping) {
  std::set<std::string> out;
  for (const auto& k : keys) {
    auto it = mapping.find(k);
    if (it == mapping.end()) return std::nullopt;
    out.insert(it->second);
  }
  return out;
}

std::string region_label(const StateNode& owner, const Region& r) {
  return owner.name + "/" + r.name;
}

}  // namespace

StructureMatch match_structures(const StateMachine& gen, const StateMachine& truth,
                                const StateMapping& mapping) {
  StructureMatch out;
  const auto gc = sorted_composites(gen);
  const auto tc = sorted_composites(truth);

  std::map<std::string, const StateNode*> truth_by_key;
  for (const auto& t : tc) truth_by_key.emplace(t.key, t.node);

  // Hierarchical: names (via the state mapping) first, then substate sets.
  std::map<std::string, std::string> comp_map;  // gen key -> truth key
  std::set<std::string> truth_bound;
  for (const auto& g : gc) {
    auto it = mapping.find(g.key);
    if (it != mapping.end() && truth_by_key.contains(it->second) &&
        !truth_bound.contains(it->second)) {
      comp_map[g.key] = it->second;
      truth_bound.insert(it->second);
    }
  }
  for (const auto& g : gc) {
    if (comp_map.contains(g.key)) continue;
    auto img = image(direct_substates(*g.node), mapping);
    if (!img) continue;
    for (const auto& t : tc) {
      if (truth_bound.contains(t.key)) continue;
      if (direct_substates(*t.node) == *img) {
        comp_map[g.key] = t.key;
        truth_bound.insert(t.key);
        break;
      }
    }
  }
  for (const auto& g : gc) {
    auto it = comp_map.find(g.key);
    if (it == comp_map.end()) {
      out.hierarchical.false_positives.push_back(g.node->name);
    } else {
      out.hierarchical.matched.push_back(g.node->name + " => " +
                                         truth_by_key.at(it->second)->name);
    }
  }
  for (const auto& t : tc) {
    if (!truth_bound.contains(t.key)) out.hierarchical.false_negatives.push_back(t.node->name);
  }

  // Parallel regions.
  std::set<std::pair<std::string, std::size_t>> truth_regions_used;
  for (const auto& g : gc) {
    if (g.node->regions.size() < 2) continue;
    auto cit = comp_map.find(g.key);
    const StateNode* t = nullptr;
    if (cit != comp_map.end()) {
      const StateNode* cand = truth_by_key.at(cit->second);
      if (cand->regions.size() >= 2) t = cand;
    }
    for (const auto& gr : g.node->regions) {
      bool hit = false;
      if (t != nullptr) {
        auto img = image(substate_keys(gr), mapping);
        for (std::size_t r = 0; img && r < t->regions.size(); ++r) {
          if (truth_regions_used.contains({cit->second, r})) continue;
          if (substate_keys(t->regions[r]) == *img) {
            truth_regions_used.insert({cit->second, r});
            out.parallel.matched.push_back(region_label(*g.node, gr) + " => " +
                                           region_label(*t, t->regions[r]));
            hit = true;
            break;
          }
        }
      }
      if (!hit) out.parallel.false_positives.push_back(region_label(*g.node, gr));
    }
  }
  for (const auto& t : tc) {
    if (t.node->regions.size() < 2) continue;
    for (std::size_t r = 0; r < t.node->regions.size(); ++r) {
      if (!truth_regions_used.contains({t.key, r})) {
        out.parallel.false_negatives.push_back(region_label(*t.node, t.node->regions[r]));
      }
    }
  }

  // History.
  std::set<std::string> truth_history_hit;
  for (const auto& g : gc) {
    if (!g.node->has_history) continue;
    auto cit = comp_map.find(g.key);
    if (cit != comp_map.end() && truth_by_key.at(cit->second)->has_history) {
      truth_history_hit.insert(cit->second);
      out.history.matched.push_back(g.node->name + ".H => " +
                                    truth_by_key.at(cit->second)->name + ".H");
    } else {
      out.history.false_positives.push_back(g.node->name + ".H");
    }
  }
  for (const auto& t : tc) {
    if (t.node->has_history && !truth_history_hit.contains(t.key)) {
      out.history.false_negatives.push_back(t.node->name + ".H");
    }
  }

  finish_counts(out.hierarchical);
  finish_counts(out.parallel);
  finish_counts(out.history);
  return out;
}

MatchSets evaluate(const StateMachine& gen, const StateMachine& truth,
                   const AliasMap& aliases) {
  require_valid(gen);
  require_valid(truth);
  MatchSets sets;
  auto states = match_states(gen, truth, aliases);
  auto deps = match_dependents(gen, truth, states.mapping, aliases);
  auto structs = match_structures(gen, truth, states.mapping);
  sets[Component::kStates] = std::move(states.states);
  sets[Component::kTransitions] = std::move(deps.transitions);
  sets[Component::kGuards] = std::move(deps.guards);
  sets[Component::kActions] = std::move(deps.actions);
  sets[Component::kHierarchical] = std::move(structs.hierarchical);
  sets[Component::kParallel] = std::move(structs.parallel);
  sets[Component::kHistory] = std::move(structs.history);
  return sets;
}

// ---------------------------------------------------------------------------
// Metrics

std::optional<Metrics> score_counts(const Counts& c) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) return std::nullopt;
  Metrics m;
  const double tp = static_cast<double>(c.tp);
  m.precision = c.tp + c.fp == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fp);
  m.recall = c.tp + c.fn == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

EvalReport score(const MatchSets& sets) {
  EvalReport r;
  Counts total;
  for (Component c : kAllComponents) {
    const auto& m = sets[c];
    const auto idx = static_cast<std::size_t>(c);
    r.components[idx] = score_counts({m.tp, m.fp, m.fn});
    r.samples[idx] = r.components[idx] ? 1 : 0;
    total.tp += m.tp;
    total.fp += m.fp;
    total.fn += m.fn;
  }
  r.aggregate = score_counts(total);
  r.aggregate_samples = r.aggregate ? 1 : 0;
  return r;
}

std::string_view average_mode_name(AverageMode mode) {
  return mode == AverageMode::kMacro ? "macro" : "pooled";
}

namespace {

struct Accumulator {
  Metrics sum;
  std::size_t n = 0;

  void add(const std::optional<Metrics>& m) {
    if (!m) return;
    sum.precision += m->precision;
    sum.recall += m->recall;
    sum.f1 += m->f1;
    ++n;
  }
  std::optional<Metrics> mean() const {
    if (n == 0) return std::nullopt;
    const double d = static_cast<double>(n);
    return Metrics{sum.precision / d, sum.recall / d, sum.f1 / d};
  }
};

}  // namespace

EvalReport macro_average(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("macro_average of no reports");
  EvalReport out;
  for (Component c : kAllComponents) {
    const auto idx = static_cast<std::size_t>(c);
    Accumulator acc;
    for (const auto& r : reports) acc.add(r.components[idx]);
    out.components[idx] = acc.mean();
    out.samples[idx] = acc.n;
  }
  Accumulator agg;
  for (const auto& r : reports) agg.add(r.aggregate);
  out.aggregate = agg.mean();
  out.aggregate_samples = agg.n;
  return out;
}

EvalReport pooled_average(const std::vector<MatchSets>& sets) {
  if (sets.empty()) throw std::invalid_argument("pooled_average of no scenarios");
  MatchSets sum;
  for (const auto& s : sets) {
    for (Component c : kAllComponents) {
      sum[c].tp += s[c].tp;
      sum[c].fp += s[c].fp;
      sum[c].fn += s[c].fn;
    }
  }
  EvalReport r = score(sum);
  for (Component c : kAllComponents) {
    std::size_t n = 0;
    for (const auto& s : sets) {
      if (s[c].tp + s[c].fp + s[c].fn > 0) ++n;
    }
    r.samples[static_cast<std::size_t>(c)] = n;
  }
  r.aggregate_samples = sets.size();
  return r;
}

}  // namespace smforge
