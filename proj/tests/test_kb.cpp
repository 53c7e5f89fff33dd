#include <gtest/gtest.h>

#include <random>

#include "oracle/datalog_oracle.hpp"
#include "support/print.hpp"
#include "reactlog/kb.hpp"
#include "reactlog/syntax.hpp"

using namespace reactlog;

namespace {

Term T(std::string_view s) { return parse_term(s); }

bool holds(KnowledgeBase& kb, std::string_view goal) { return kb.holds(T(goal)); }

TEST(Updates, AddAndRemoveById) {
  KnowledgeBase kb;
  auto r = kb.add_text("id1", "r(1) :- f(1). f(1).");
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_TRUE(holds(kb, "r(1)"));
  EXPECT_EQ(kb.snapshot()->update_clauses("id1").size(), 2u);
  EXPECT_TRUE(kb.remove_update("id1").ok());
  EXPECT_FALSE(holds(kb, "r(1)"));
  EXPECT_FALSE(kb.snapshot()->has_update("id1"));
}

TEST(Updates, EmptyAddIsNoop) {
  KnowledgeBase kb;
  EXPECT_EQ(kb.add_update("idX", {}).status, UpdateStatus::noop);
}

TEST(Updates, RemoveUnknownLeavesStoreAlone) {
  KnowledgeBase kb;
  kb.add_text("a", "f(1).");
  auto before = kb.snapshot();
  EXPECT_EQ(kb.remove_update("nope").status, UpdateStatus::not_found);
  EXPECT_EQ(kb.snapshot(), before);
}

TEST(Updates, PlaceholdersFilledPositionally) {
  KnowledgeBase kb;
  ASSERT_TRUE(kb.add_text("id3", "f(_0, _1). g(_1).", {Term::integer(1), Term::integer(2)}).ok());
  EXPECT_TRUE(holds(kb, "f(1, 2)"));
  EXPECT_TRUE(holds(kb, "g(2)"));
}

TEST(Updates, RemoveThenReaddGivesSameAnswers) {
  KnowledgeBase kb;
  const char* text = "f(1). f(2). r(X) :- f(X), not(g(X)). g(2).";
  kb.add_text("u", text);
  auto first = kb.query(T("r(X)"));
  kb.remove_update("u");
  EXPECT_TRUE(kb.query(T("r(X)")).empty());
  kb.add_text("u", text);
  EXPECT_EQ(kb.query(T("r(X)")), first);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(apply(first[0], T("X")), T("1"));
}

TEST(Updates, IdIsolation) {
  KnowledgeBase ab, b;
  ab.add_text("A", "f(1). h(X) :- f(X).");
  ab.add_text("B", "f(2). g(3).");
  ab.remove_update("A");
  b.add_text("B", "f(2). g(3).");
  for (const char* q : {"f(X)", "g(X)", "h(X)"}) EXPECT_EQ(ab.query(T(q)), b.query(T(q))) << q;
}

TEST(Updates, RetractAllAndRemoveClauses) {
  KnowledgeBase kb;
  kb.add_text("a", "f(1). f(2). g(1).");
  EXPECT_TRUE(kb.retract_all(T("f(_)")).ok());
  EXPECT_FALSE(holds(kb, "f(X)"));
  EXPECT_TRUE(holds(kb, "g(1)"));
}

TEST(Updates, RejectsUnstratifiedProgram) {
  KnowledgeBase kb;
  auto r = kb.add_text("bad", "p :- not(q). q :- not(p).");
  EXPECT_EQ(r.status, UpdateStatus::rejected);
  EXPECT_FALSE(kb.snapshot()->has_update("bad"));
}

TEST(Query, FactsRulesAndNaf) {
  KnowledgeBase kb;
  kb.add_text("k", "f(1). r(X) :- f(X). a :- b. b :- c. c.");
  auto ans = kb.query(T("r(Y)"));
  ASSERT_EQ(ans.size(), 1u);
  EXPECT_EQ(apply(ans[0], T("Y")), T("1"));
  EXPECT_TRUE(holds(kb, "not(f(2))"));
  EXPECT_TRUE(holds(kb, "a"));
}

TEST(Query, StepBudgetRaises) {
  KnowledgeBase kb;
  kb.add_text("k", "n(X) :- n(s(X)).");
  QueryOptions o;
  o.step_budget = 500;
  EXPECT_THROW(kb.query(T("n(0)"), o), BudgetExceeded);
}

TEST(Query, Arithmetic) {
  KnowledgeBase kb;
  auto ans = kb.query(T("X = 1 + 2 * 3"));
  ASSERT_EQ(ans.size(), 1u);
  EXPECT_EQ(apply(ans[0], T("X")), T("7"));
}

TEST(Query, HostFunctionsBindOutputs) {
  KnowledgeBase kb;
  kb.register_host_function(HostFunction{"rbsla.util.Math.add", 3,
                                         [](std::span<const Term> a) -> std::optional<std::vector<Term>> {
                                           auto x = as_integer(a[0]), y = as_integer(a[1]);
                                           if (!x || !y) return std::nullopt;
                                           return std::vector<Term>{a[0], a[1], Term::integer(*x + *y)};
                                         },
                                         false});
  auto ans = kb.query(T("X = rbsla.util.Math.add(1, 2)"));
  ASSERT_EQ(ans.size(), 1u);
  EXPECT_EQ(apply(ans[0], T("X")), T("3"));
  EXPECT_THROW(
      kb.register_host_function(HostFunction{"rbsla.util.Math.add", 3, [](auto) { return std::nullopt; }, false}),
      std::invalid_argument);
  EXPECT_THROW(kb.query(T("unknown.Host.fn(1)")), UnknownHostFunction);
}

// Ground queries on random stratified programs agree with the perfect model.
TEST(Query, StratifiedProgramsMatchPerfectModel) {
  std::mt19937 rng(11);
  for (int round = 0; round < 400; ++round) {
    auto prog = oracle::random_program(rng);
    KnowledgeBase kb;
    ASSERT_TRUE(kb.add_text("p", prog.text()).ok()) << prog.text();
    auto model = prog.perfect_model();
    for (int i = 0; i < prog.preds; ++i) {
      for (int x = 0; x < prog.domain; ++x) {
        std::string q = oracle::DProgram::p(i) + "(" + oracle::DProgram::c(x) + ")";
        EXPECT_EQ(kb.holds(T(q)), model[i].count(x) > 0) << q << "\n" << prog.text();
      }
    }
  }
}

TEST(Transactions, RollbackRestoresEveryAnswer) {
  KnowledgeBase kb;
  kb.add_text("base", "f(1). g(2).");
  TxnId t = kb.begin_transaction();
  kb.add_text("x", "f(9).", {}, false, t);
  kb.remove_update("base", false, t);
  EXPECT_TRUE(kb.transaction_state(t)->has_update("x"));
  EXPECT_FALSE(holds(kb, "f(9)"));  // not visible outside the transaction
  kb.rollback(t);
  EXPECT_FALSE(kb.transaction_open(t));
  EXPECT_TRUE(holds(kb, "f(1)"));
  EXPECT_FALSE(holds(kb, "f(9)"));
}

TEST(Transactions, CommitPublishes) {
  KnowledgeBase kb;
  TxnId t = kb.begin_transaction();
  kb.add_text("x", "f(9).", {}, false, t);
  EXPECT_TRUE(kb.commit(t).ok());
  EXPECT_TRUE(holds(kb, "f(9)"));
}

class Integrity : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_TRUE(kb.add_text("facts", "neg(p(x)).").ok());
    ASSERT_TRUE(kb.add_text("constraints", "integrity(xor(p(x), neg(p(x)))).").ok());
  }
  KnowledgeBase kb;
};

TEST_F(Integrity, LiteralTestReportsViolation) {
  auto r = kb.test_integrity_literal(T("p(x)"));
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.violations[0].detail.find("p(x)"), std::string::npos);
  // purely hypothetical
  EXPECT_FALSE(holds(kb, "p(x)"));
  EXPECT_TRUE(kb.test_integrity().ok());
}

TEST_F(Integrity, TransactionalAddRollsBack) {
  auto before = kb.snapshot();
  auto r = kb.add_text("upd", "p(x).", {}, true);
  EXPECT_EQ(r.status, UpdateStatus::violated);
  EXPECT_FALSE(r.violations.empty());
  EXPECT_EQ(kb.snapshot(), before);
  EXPECT_FALSE(holds(kb, "p(x)"));
}

TEST_F(Integrity, CommitWithViolationReverts) {
  TxnId t = kb.begin_transaction();
  kb.add_text("upd", "p(x).", {}, false, t);
  auto r = kb.commit(t);
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(holds(kb, "p(x)"));
}

TEST_F(Integrity, NonTransactionalAddIsNotChecked) {
  EXPECT_TRUE(kb.add_text("upd", "p(x).").ok());
  EXPECT_FALSE(kb.test_integrity().ok());
}

// All four constraint kinds against a three-fact store.
TEST(IntegrityKinds, HandOracle) {
  struct Case {
    const char* constraint;
    bool ok_full;     // f(1), f(2), f(3)
    bool ok_removed;  // after removing f(1)
  };
  const Case cases[] = {
      {"integrity(and(f(1)))", true, false},       {"integrity(and(f(1), f(2)))", true, false},
      {"integrity(or(f(1), f(4)))", true, false},  {"integrity(or(f(2), f(4)))", true, true},
      {"integrity(xor(f(1), f(2)))", false, true}, {"integrity(xor(f(1), f(4)))", true, true},
      {"integrity(not(f(1)))", false, true},       {"integrity(not(f(4)))", true, true},
  };
  for (const auto& c : cases) {
    KnowledgeBase kb;
    kb.add_text("one", "f(1).");
    kb.add_text("rest", "f(2). f(3).");
    kb.add_text("c", std::string(c.constraint) + ".");
    EXPECT_EQ(kb.test_integrity().ok(), c.ok_full) << c.constraint;
    EXPECT_EQ(kb.test_integrity_literal(T("f(1)"), true).ok(), c.ok_removed) << c.constraint;
    kb.remove_update("one");
    EXPECT_EQ(kb.test_integrity().ok(), c.ok_removed) << c.constraint;
  }
  KnowledgeBase empty;
  EXPECT_TRUE(empty.test_integrity().ok());
}

TEST(IntegrityHooks, FailingHookRevertsCommit) {
  KnowledgeBase kb;
  kb.add_text("f", "stock(3).");
  kb.register_test_hook("stock_positive", T("stock(N), N > 0"));
  EXPECT_TRUE(kb.test_integrity().ok());
  TxnId t = kb.begin_transaction();
  kb.remove_update("f", false, t);
  EXPECT_FALSE(kb.commit(t).ok());
  EXPECT_TRUE(holds(kb, "stock(3)"));
}

TEST(Consumption, Policies) {
  auto make = [](KnowledgeBase& kb) {
    kb.add_text("eis(a)", "occurs(a, 1).");
    kb.add_text("eis(a)", "occurs(a, 2).");
    kb.add_text("eis(a)", "occurs(a, 3).");
  };
  auto times = [](KnowledgeBase& kb) {
    std::vector<Term> out;
    for (const auto& s : kb.query(T("occurs(a, T)"))) out.push_back(apply(s, T("T")));
    return out;
  };
  {
    KnowledgeBase kb;
    make(kb);
    kb.consume("eis(a)", ConsumptionPolicy::first);
    EXPECT_EQ(times(kb), (std::vector<Term>{T("2"), T("3")}));
    kb.consume("eis(a)", ConsumptionPolicy::last);
    EXPECT_EQ(times(kb), (std::vector<Term>{T("2")}));
  }
  {
    KnowledgeBase kb;
    make(kb);
    kb.consume("eis(a)", ConsumptionPolicy::none);
    EXPECT_EQ(times(kb).size(), 3u);
    kb.consume("eis(a)", ConsumptionPolicy::all);
    EXPECT_TRUE(times(kb).empty());
    EXPECT_TRUE(kb.consume("eis(zzz)", ConsumptionPolicy::all).ok());
  }
  EXPECT_EQ(policy_from_string("first"), ConsumptionPolicy::first);
}

TEST(Updates, UpdateBuiltinsInsideQueries) {
  KnowledgeBase kb;
  EXPECT_TRUE(holds(kb, "add(id3, \"f(_0). g(_1).\", [1, 2])"));
  EXPECT_TRUE(holds(kb, "g(2)"));
  EXPECT_TRUE(holds(kb, "remove(id3)"));
  EXPECT_FALSE(holds(kb, "f(1)"));
  // a query sees its own writes in later goals
  EXPECT_TRUE(holds(kb, "add(k, \"h(5).\"), h(5)"));
}

}  // namespace
