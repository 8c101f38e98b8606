#include <gtest/gtest.h>

#include <random>

#include "smforge/umple.hpp"
#include "support/random_machines.hpp"

using namespace smforge;

namespace {

StateMachine parse_strict(const std::string& text) {
  auto doc = parse_umple(text, ParseMode::kStrict);
  EXPECT_TRUE(doc.machine.has_value());
  return *doc.machine;
}

}  // namespace

TEST(UmpleEmit, SimpleTransitionInsideSource) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {{"A", StateKind::kSimple, {}, false}, {"B", StateKind::kSimple, {}, false}};
  sm.transitions = {{"A", "B", "go", std::nullopt, {}}};
  finalize_structure(sm);
  const std::string text = emit_umple(sm);
  EXPECT_EQ(text,
            "class M {\n"
            "  sm {\n"
            "    A {\n"
            "      go -> B;\n"
            "    }\n"
            "    B {}\n"
            "  }\n"
            "}\n");
}

TEST(UmpleEmit, RegionsSeparatedByBars) {
  auto sm = parse_strict(
      "class M { sm { P { A {} || B {} } } }");
  ASSERT_EQ(sm.root_states.size(), 1u);
  ASSERT_EQ(sm.root_states[0].regions.size(), 2u);
  const std::string text = emit_umple(sm);
  EXPECT_NE(text.find("||"), std::string::npos);
}

TEST(UmpleEmit, GuardsActionsAndHistory) {
  const std::string src =
      "class M {\n"
      "  sm {\n"
      "    Top {\n"
      "      out [x > 0] / { a; b; } -> Other;\n"
      "      H\n"
      "      In1 {\n"
      "        next -> In2;\n"
      "      }\n"
      "      In2 {\n"
      "        -> In1;\n"
      "      }\n"
      "    }\n"
      "    Other {}\n"
      "  }\n"
      "}\n";
  auto sm = parse_strict(src);
  EXPECT_TRUE(sm.root_states[0].has_history);
  ASSERT_EQ(sm.transitions.size(), 3u);
  EXPECT_EQ(emit_umple(sm), src);
}

TEST(UmpleEmit, RejectsInvalidMachine) {
  StateMachine sm;
  sm.name = "M";
  sm.root_states = {{"A", StateKind::kSimple, {}, false}};
  sm.transitions = {{"A", "Ghost", "go", std::nullopt, {}}};
  EXPECT_THROW(emit_umple(sm), ValidationError);
}

TEST(UmpleParse, FencedLenient) {
  const std::string body = "class M { sm { A { go -> B; } B {} } }";
  auto plain = parse_umple(body, ParseMode::kLenient);
  auto fenced = parse_umple("Here is the model:\n```umple\n" + body + "\n```\nHope this helps.",
                            ParseMode::kLenient);
  ASSERT_TRUE(fenced.machine);
  EXPECT_EQ(fenced.error_count(), 0u);
  EXPECT_TRUE(equivalent(*plain.machine, *fenced.machine));
}

TEST(UmpleParse, MissingTargetDroppedWithWarning) {
  auto doc = parse_umple("state machine sm { A { go -> ; } }", ParseMode::kLenient);
  ASSERT_TRUE(doc.machine);
  ASSERT_EQ(doc.machine->root_states.size(), 1u);
  EXPECT_EQ(doc.machine->root_states[0].name, "A");
  EXPECT_TRUE(doc.machine->transitions.empty());
  EXPECT_EQ(doc.warning_count(), 1u);
}

TEST(UmpleParse, StrictThrowsWithDiagnostics) {
  try {
    parse_umple("class M { sm { A { go -> ; } } }", ParseMode::kStrict);
    FAIL() << "expected ParseFailed";
  } catch (const ParseFailed& e) {
    EXPECT_FALSE(e.diagnostics().empty());
    EXPECT_GE(e.diagnostics()[0].line, 1u);
  }
}

TEST(UmpleParse, StrictRejectsUnknownTarget) {
  EXPECT_THROW(parse_umple("class M { sm { A { go -> Ghost; } } }", ParseMode::kStrict),
               ParseFailed);
}

TEST(UmpleParse, LenientDropsEntryActions) {
  auto doc = parse_umple("class M { sm { A { entry / { beep; } go -> B; } B {} } }",
                         ParseMode::kLenient);
  ASSERT_TRUE(doc.machine);
  EXPECT_EQ(doc.machine->transitions.size(), 1u);
  EXPECT_GE(doc.warning_count(), 1u);
}

TEST(UmpleParse, QualifiedHistoryTarget) {
  auto doc = parse_umple("class M { sm { Off { on -> On.H; } On { off -> Off; X {} Y {} } } }",
                         ParseMode::kLenient);
  ASSERT_TRUE(doc.machine);
  EXPECT_TRUE(doc.machine->root_states[1].has_history);
  EXPECT_EQ(doc.machine->transitions[0].target, "On");
}

TEST(UmpleParse, LenientNeverThrowsOnGarbage) {
  std::mt19937 rng(11);
  const std::string alphabet = "AB{}[]/;->|H \n\tclass sm go x*.\"'`";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string s(static_cast<std::size_t>(i % 80), ' ');
    for (auto& c : s) c = alphabet[pick(rng)];
    UmpleDocument doc;
    EXPECT_NO_THROW(doc = parse_umple(s, ParseMode::kLenient));
    ASSERT_TRUE(doc.machine);
    EXPECT_TRUE(validate(*doc.machine).empty()) << s;
  }
}

TEST(UmpleRoundTrip, RandomMachines) {
  std::mt19937 rng(5);
  testkit::RandomSpec spec;
  spec.max_states = 10;
  spec.max_transitions = 14;
  for (int i = 0; i < 300; ++i) {
    auto sm = testkit::random_machine(rng, spec);
    const std::string text = emit_umple(sm);
    auto strict = parse_umple(text, ParseMode::kStrict);
    ASSERT_TRUE(strict.machine);
    EXPECT_TRUE(strict.diagnostics.empty());
    EXPECT_TRUE(equivalent(sm, *strict.machine)) << describe_difference(sm, *strict.machine)
                                                  << "\n" << text;
    auto lenient = parse_umple(text, ParseMode::kLenient);
    ASSERT_TRUE(lenient.machine);
    EXPECT_TRUE(equivalent(*strict.machine, *lenient.machine));
    EXPECT_EQ(emit_umple(*strict.machine), text);
  }
}
