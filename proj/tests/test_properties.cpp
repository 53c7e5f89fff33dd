#include <gtest/gtest.h>

#include "support/print.hpp"
#include "support/properties.hpp"

namespace {

constexpr std::size_t kCases = 500;

void expect_clean(const props::Result& r) {
  EXPECT_GE(r.cases, kCases);
  EXPECT_EQ(r.failures, 0u) << "first counterexample: " << r.first;
}

TEST(Properties, BlankPartEquivalence) { expect_clean(props::blank_part_equivalence(kCases)); }
TEST(Properties, CutAtMostOnce) { expect_clean(props::cut_at_most_once(kCases)); }
TEST(Properties, TransactionAtomicity) { expect_clean(props::transaction_atomicity(kCases)); }
TEST(Properties, ConsumptionSoundness) { expect_clean(props::consumption_soundness(kCases)); }
TEST(Properties, DetectPurity) { expect_clean(props::detect_purity(kCases)); }

TEST(Properties, DifferentSeedsAgree) {
  expect_clean(props::blank_part_equivalence(kCases, 77));
  expect_clean(props::consumption_soundness(kCases, 78));
  expect_clean(props::detect_purity(kCases, 79));
}

// Removing a blocking occurrence can create detections under xor, so the
// consumption property is stated for expressions without it.
TEST(Properties, XorBreaksConsumptionMonotonicity) {
  using namespace reactlog;
  KnowledgeBase kb;
  oracle::load_eis(kb, {{'b', 1}, {'c', 2}});
  EventExpr e = parse_event_expr("or(c, xor(b, c))");
  auto before = detect(kb, e);
  ASSERT_EQ(before.size(), 1u);
  kb.consume("eis(c)", ConsumptionPolicy::all);
  EXPECT_EQ(detect(kb, e).size(), 1u);
}

}  // namespace

namespace {

bool ordered_trace(const std::vector<std::string>& trace) {
  static const std::vector<std::string> phases{"time", "event", "condition", "action", "postcondition"};
  std::size_t i = 0;
  while (i < trace.size() && i < phases.size() && trace[i] == phases[i]) ++i;
  if (i < trace.size() && trace[i] == "else") ++i;
  return i == trace.size();
}

TEST(Properties, PhaseTraceIsOrderedPrefix) {
  using namespace reactlog;
  props::Gen g(11);
  for (int i = 0; i < 500; ++i) {
    std::string rule = "eca(" + g.goal() + ", " + g.goal() + ", " + g.goal() + ", " +
                       (g.coin() ? "add(log, \"x.\")" : g.goal()) + ", " + (g.coin() ? "!" : g.goal()) + ", " +
                       (g.coin() ? "_" : "add(log, \"y.\")") + ").";
    KnowledgeBase kb;
    kb.add_text("store", g.store());
    kb.add_text("rule", rule);
    EcaEngine engine(kb, props::serial_options());
    for (const auto& o : engine.run(props::cycles(2)).outcomes) {
      ASSERT_TRUE(ordered_trace(o.trace)) << rule << " -> " << props::outcome_text(o);
      if (o.else_fired) EXPECT_FALSE(o.fired);
    }
  }
  EXPECT_FALSE(ordered_trace({"event", "time"}));
  EXPECT_TRUE(ordered_trace({"time", "event", "else"}));
}

}  // namespace
