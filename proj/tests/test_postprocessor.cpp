#include <gtest/gtest.h>

#include <algorithm>
#include <array>

#include "smforge/postprocessor.hpp"
#include "smforge/tables.hpp"
#include "smforge/umple.hpp"

using namespace smforge;

namespace {

StepOutcome outcome(std::string step, const std::string& response) {
  StepOutcome o;
  o.step_id = std::move(step);
  o.raw_response = response;
  o.parsed = parse_response_tables(response);
  return o;
}

std::string states_table(std::initializer_list<const char*> names) {
  std::string s = "<table><tr><th>Name</th><th>Parent</th><th>Region</th><th>Kind</th></tr>";
  for (const char* n : names) s += std::string("<tr><td>") + n + "</td><td></td><td></td><td>simple</td></tr>";
  return s + "</table>";
}

std::string transitions_table(
    std::initializer_list<std::array<const char*, 5>> rows) {
  std::string s =
      "<table><tr><th>Source</th><th>Target</th><th>Event</th><th>Guard</th><th>Actions</th></tr>";
  for (const auto& r : rows) {
    s += "<tr>";
    for (const char* c : r) s += std::string("<td>") + c + "</td>";
    s += "</tr>";
  }
  return s + "</table>";
}

bool has_warning(const WarningLog& log, std::string_view step, std::string_view component) {
  return std::any_of(log.begin(), log.end(), [&](const Warning& w) {
    return w.step == step && w.component == component;
  });
}

}  // namespace

TEST(StepRole, Ownership) {
  EXPECT_TRUE(step_role("S1").replaces.contains(Component::kStates));
  EXPECT_TRUE(step_role("S3").replaces.contains(Component::kGuards));
  EXPECT_TRUE(step_role("S4").replaces.contains(Component::kActions));
  EXPECT_TRUE(step_role("E2").lists_events);
  EXPECT_TRUE(step_role("E3:start").accumulates_transitions);
  EXPECT_TRUE(step_role("bogus").replaces.empty());
}

TEST(Merge, ProvenanceFollowsLastSuccessfulStep) {
  MergeState st;
  st = merge_step(st, outcome("S1", states_table({"Idle", "Busy"})));
  st = merge_step(st, outcome("S3", transitions_table({{"Idle", "Busy", "go", "", ""},
                                                        {"Busy", "Idle", "done", "ok", ""}})));
  st = merge_step(st, outcome("S4", transitions_table({{"Idle", "Busy", "go", "", "beep"},
                                                        {"Busy", "Idle", "done", "", ""}})));
  EXPECT_EQ(st.current.provenance.at(Component::kStates), "S1");
  EXPECT_EQ(st.current.provenance.at(Component::kTransitions), "S3");
  EXPECT_EQ(st.current.provenance.at(Component::kActions), "S4");
  ASSERT_EQ(st.current.transition_rows.size(), 2u);
  // S4 does not own guards: the S3 guard survives.
  EXPECT_EQ(st.current.transition_rows[1].guard, "ok");
  EXPECT_EQ(st.current.transition_rows[0].actions, std::vector<std::string>{"beep"});
  EXPECT_EQ(st.order, (std::vector<std::string>{"S1", "S3", "S4"}));
}

TEST(Merge, CorruptStepFallsBackWithWarning) {
  MergeState st;
  st = merge_step(st, outcome("S1", states_table({"A", "B"})));
  st = merge_step(st, outcome("S3", transitions_table({{"A", "B", "go", "", "first"}})));
  const auto before = st.current.transition_rows;
  st = merge_step(st, outcome("S4", "<table><tr><td>garbage</td></tr>"));
  EXPECT_EQ(st.current.transition_rows, before);
  EXPECT_TRUE(has_warning(st.warnings, "S4", "actions"));
  EXPECT_EQ(st.snapshots.at("S4"), st.snapshots.at("S3"));
}

TEST(Merge, DoubleMergeIsPreconditionError) {
  MergeState st = merge_step({}, outcome("S1", states_table({"A"})));
  EXPECT_THROW(merge_step(st, outcome("S1", states_table({"A"}))), PreconditionError);
}

TEST(Merge, NoneAnswerForParallelIsNotAFallback) {
  MergeState st = merge_step({}, outcome("S1", states_table({"A"})));
  st = merge_step(st, outcome("S2", "None"));
  EXPECT_FALSE(has_warning(st.warnings, "S2", "parallel"));
  EXPECT_EQ(st.current.provenance.at(Component::kParallel), "S2");
}

TEST(Merge, PerEventStepsAccumulate) {
  MergeState st = merge_step({}, outcome("E1", states_table({"A", "B"})));
  st = merge_step(st, outcome("E3:go", transitions_table({{"A", "B", "go", "", ""}})));
  st = merge_step(st, outcome("E3:back", transitions_table({{"B", "A", "back", "", ""}})));
  EXPECT_EQ(st.current.transition_rows.size(), 2u);
  st = merge_step(st, outcome("E3:none", "I could not find anything."));
  EXPECT_EQ(st.current.transition_rows.size(), 2u);
  EXPECT_TRUE(has_warning(st.warnings, "E3:none", "transitions"));
}

TEST(Merge, TruncationIsWarned) {
  auto o = outcome("S1", states_table({"A"}));
  o.truncated = true;
  auto st = merge_step({}, o);
  EXPECT_TRUE(std::any_of(st.warnings.begin(), st.warnings.end(), [](const Warning& w) {
    return w.message.find("truncated") != std::string::npos;
  }));
}

TEST(Dedupe, CollapsesAndUnionsActions) {
  PartialModel p;
  p.states_rows = {{"Idle", {}, {}, RowKind::kSimple}, {"idle", {}, {}, RowKind::kComposite}};
  p.transition_rows = {{"Idle", "Idle", "tick", std::nullopt, {"a"}},
                       {"idle", "IDLE", "Tick", std::nullopt, {"b", "a"}},
                       {"Idle", "Idle", "tick", "x > 1", {}}};
  WarningLog log;
  auto d = dedupe(p, &log);
  ASSERT_EQ(d.states_rows.size(), 1u);
  EXPECT_EQ(d.states_rows[0].kind, RowKind::kComposite);
  ASSERT_EQ(d.transition_rows.size(), 2u);
  EXPECT_EQ(d.transition_rows[0].actions, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(has_warning(log, "dedupe", "guards"));
  EXPECT_EQ(dedupe(d), d);
}

TEST(Finalize, DropsTransitionsToUnknownStates) {
  PartialModel p;
  p.states_rows = {{"A", {}, {}, RowKind::kSimple}, {"B", {}, {}, RowKind::kSimple}};
  p.transition_rows = {{"A", "B", "go", std::nullopt, {}}, {"A", "Ghost", "boo", std::nullopt, {}}};
  WarningLog log;
  auto sm = finalize(p, "M", &log);
  EXPECT_EQ(sm.transitions.size(), 1u);
  EXPECT_TRUE(std::any_of(log.begin(), log.end(), [](const Warning& w) {
    return w.message.find("Ghost") != std::string::npos;
  }));
}

TEST(Finalize, EmptyInputFails) { EXPECT_THROW(finalize({}, "M"), FinalizeFailed); }

TEST(Finalize, StructureRowsBeatStateParents) {
  PartialModel p;
  p.states_rows = {{"P", {}, {}, RowKind::kComposite},
                   {"Q", {}, {}, RowKind::kComposite},
                   {"X", "Q", {}, RowKind::kSimple},
                   {"Y", "Q", {}, RowKind::kSimple}};
  p.structure_rows = {{"P", "r1", {"X"}, true}};
  WarningLog log;
  auto sm = finalize(p, "M", &log);
  const StateNode* pn = find_state(sm, "p");
  ASSERT_NE(pn, nullptr);
  ASSERT_TRUE(pn->is_composite());
  EXPECT_EQ(pn->regions[0].substates[0].name, "X");
  EXPECT_TRUE(pn->has_history);
  EXPECT_EQ(find_state(sm, "q")->regions[0].substates.size(), 1u);
  EXPECT_FALSE(log.empty());
}

TEST(Finalize, SanitizesAnnotations) {
  PartialModel p;
  p.states_rows = {{"A", {}, {}, RowKind::kSimple}};
  p.transition_rows = {{"A", "A", "go", "a[0] > 1", {"x = {1}; y"}}};
  auto sm = finalize(p, "M");
  ASSERT_EQ(sm.transitions.size(), 1u);
  EXPECT_EQ(sm.transitions[0].guard, "a(0) > 1");
  EXPECT_EQ(sm.transitions[0].actions[0], "x = (1), y");
  // Emittable after sanitizing.
  EXPECT_NO_THROW(parse_umple(emit_umple(sm), ParseMode::kStrict));
}
