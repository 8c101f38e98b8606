#include <gtest/gtest.h>

#include <random>

#include "smforge/ir.hpp"
#include "support/random_machines.hpp"

using namespace smforge;

namespace {

StateNode simple(std::string name) {
  StateNode n;
  n.name = std::move(name);
  return n;
}

StateNode composite(std::string name, std::vector<std::vector<std::string>> regions) {
  StateNode n;
  n.name = std::move(name);
  n.kind = StateKind::kComposite;
  for (auto& r : regions) {
    Region reg;
    for (auto& s : r) reg.substates.push_back(simple(s));
    n.regions.push_back(std::move(reg));
  }
  return n;
}

StateMachine two_state() {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {simple("A"), simple("B")};
  sm.transitions = {{"A", "B", "go", std::nullopt, {}}};
  finalize_structure(sm);
  return sm;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v) {
    if (x.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST(Validate, SingleSimpleStateIsValid) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {simple("Only")};
  EXPECT_TRUE(validate(sm).empty());
}

TEST(Validate, UnknownTarget) {
  auto sm = two_state();
  sm.transitions.push_back({"A", "Ghost", "go", std::nullopt, {}});
  auto v = validate(sm);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "unknown target");
  EXPECT_NE(v[0].element.find("Ghost"), std::string::npos);
  EXPECT_THROW(require_valid(sm), ValidationError);
}

TEST(Validate, HistoryOnSimpleState) {
  auto sm = two_state();
  sm.root_states[0].has_history = true;
  auto v = validate(sm);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "history on simple state");
}

TEST(Validate, StructuralRules) {
  StateMachine sm;
  sm.name = "M";
  StateNode c = composite("C", {{"X"}});
  c.regions[0].initial = "Nope";
  sm.root_states = {c, simple("X")};
  sm.transitions = {{"X", "C", "", std::nullopt, {""}}};
  auto v = validate(sm);
  EXPECT_TRUE(has_rule(v, "region initial not a substate"));
  EXPECT_TRUE(has_rule(v, "duplicate state name"));
  EXPECT_TRUE(has_rule(v, "empty action"));
}

TEST(Counts, CompositeWithTwoRegions) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {composite("P", {{"A", "B"}, {"C", "D"}})};
  finalize_structure(sm);
  auto c = component_counts(sm);
  EXPECT_EQ(c.states, 5u);
  EXPECT_EQ(c.parallel_regions, 2u);
  EXPECT_EQ(c.hierarchical_states, 1u);
  EXPECT_EQ(c.history_states, 0u);
}

TEST(Counts, EmptyMachineIsAllZero) {
  StateMachine sm;
  sm.name = "Empty";
  EXPECT_EQ(component_counts(sm), ComponentCounts{});
}

TEST(Counts, SingleRegionCompositeIsNotParallel) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {composite("P", {{"A", "B"}})};
  sm.root_states[0].has_history = true;
  sm.transitions = {{"A", "B", "go", "x > 1", {"a", "b"}}, {"B", "A", std::nullopt, std::nullopt, {}}};
  finalize_structure(sm);
  auto c = component_counts(sm);
  EXPECT_EQ(c.states, 3u);
  EXPECT_EQ(c.transitions, 2u);
  EXPECT_EQ(c.guards, 1u);
  EXPECT_EQ(c.actions, 2u);
  EXPECT_EQ(c.hierarchical_states, 1u);
  EXPECT_EQ(c.parallel_regions, 0u);
  EXPECT_EQ(c.history_states, 1u);
}

TEST(Counts, InvalidMachineThrows) {
  auto sm = two_state();
  sm.transitions.push_back({"Ghost", "A", "go", std::nullopt, {}});
  EXPECT_THROW(component_counts(sm), ValidationError);
}

TEST(Counts, StableUnderReordering) {
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto sm = testkit::random_machine(rng);
    auto before = component_counts(sm);
    std::reverse(sm.root_states.begin(), sm.root_states.end());
    for_each_state(sm.root_states, [](const StateNode&, const StateNode*, std::size_t) {});
    std::vector<StateNode*> stack;
    for (auto& s : sm.root_states) stack.push_back(&s);
    while (!stack.empty()) {
      auto* s = stack.back();
      stack.pop_back();
      std::reverse(s->regions.begin(), s->regions.end());
      for (auto& r : s->regions) {
        std::reverse(r.substates.begin(), r.substates.end());
        for (auto& sub : r.substates) stack.push_back(&sub);
      }
    }
    EXPECT_EQ(component_counts(sm), before);
  }
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_name("Paper_Jam"), "paperjam");
  EXPECT_EQ(normalize_name("paperJam "), "paperjam");
  EXPECT_EQ(normalize_name("paper jam"), "paperjam");
  EXPECT_THROW(normalize_name("###"), NameUnusable);
  EXPECT_EQ(try_normalize_name("###"), "");
}

TEST(Normalize, Idempotent) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> ch(32, 126);
  for (int i = 0; i < 500; ++i) {
    std::string s(static_cast<std::size_t>(i % 17 + 1), ' ');
    for (auto& c : s) c = static_cast<char>(ch(rng));
    const std::string once = try_normalize_name(s);
    EXPECT_EQ(try_normalize_name(once), once);
  }
}

TEST(Identifier, Conversion) {
  EXPECT_EQ(to_identifier("coffee maker"), "coffee_maker");
  EXPECT_EQ(to_identifier("  9 lives"), "_9_lives");
  EXPECT_EQ(to_identifier("--"), "");
  EXPECT_TRUE(is_identifier("_a1"));
  EXPECT_FALSE(is_identifier("1a"));
  EXPECT_FALSE(is_identifier("a-b"));
}

TEST(Annotation, Canonical) {
  EXPECT_EQ(canonical_annotation("  Credit   >= Fee. "), "credit >= fee");
  EXPECT_EQ(canonical_annotation("count++;"), "count++");
  EXPECT_EQ(canonical_annotation("f(x)"), "f(x)");
}

TEST(FindState, NestedAndMissing) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {composite("Outer", {{"Inner_One", "Two"}})};
  finalize_structure(sm);
  const StateNode* n = find_state(sm, "innerOne");
  ASSERT_NE(n, nullptr);
  EXPECT_EQ(n->name, "Inner_One");
  EXPECT_EQ(find_state(sm, "ghost"), nullptr);
}

TEST(FindState, DuplicateReturnsFirstInDocumentOrder) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {composite("Outer", {{"Dup"}}), simple("dup")};
  finalize_structure(sm);
  const StateNode* n = find_state(sm, "dup");
  ASSERT_NE(n, nullptr);
  EXPECT_EQ(n->name, "Dup");
}

TEST(FinalizeStructure, NamesRegionsAndInitials) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {composite("P", {{"A", "B"}, {"C"}})};
  sm.transitions = {{"A", "B", "go", std::nullopt, {}}};
  finalize_structure(sm);
  EXPECT_EQ(sm.root_states[0].regions[0].name, "r1");
  EXPECT_EQ(sm.root_states[0].regions[1].name, "r2");
  EXPECT_EQ(sm.root_states[0].regions[0].initial, "A");
  EXPECT_EQ(sm.events, std::set<std::string>{"go"});
}

TEST(Equivalent, IgnoresRegionNamesAndTransitionOrder) {
  StateMachine a;
  a.name = "M";
  a.root_states = {composite("P", {{"A", "B"}})};
  a.transitions = {{"A", "B", "go", std::nullopt, {}}, {"B", "A", "back", std::nullopt, {}}};
  finalize_structure(a);
  StateMachine b = a;
  b.root_states[0].regions[0].name = "main";
  std::reverse(b.transitions.begin(), b.transitions.end());
  EXPECT_TRUE(equivalent(a, b));
  b.transitions.pop_back();
  EXPECT_FALSE(equivalent(a, b));
  EXPECT_FALSE(describe_difference(a, b).empty());
}
