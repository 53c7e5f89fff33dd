#include <gtest/gtest.h>

#include <random>

#include "support/print.hpp"
#include "reactlog/event_calculus.hpp"
#include "reactlog/syntax.hpp"

using namespace reactlog;

namespace {

Term T(std::string_view s) { return parse_term(s); }
TimePoint at(std::int64_t ms) { return TimePoint{ms}; }

TEST(HoldsAt, SingleInitiation) {
  KnowledgeBase kb;
  kb.add_text("t", "initiates(e1, p, T). happens(e1, 1).");
  EXPECT_TRUE(holds_at(kb, T("p"), at(2)));
  EXPECT_FALSE(holds_at(kb, T("p"), at(1)));  // not yet at the initiating instant
  EXPECT_TRUE(holds_at(kb, T("p"), at(1'000'000)));
}

TEST(HoldsAt, AlternationEndsTerminated) {
  KnowledgeBase kb;
  kb.add_text("t", "initiates(e1, p, T). terminates(e2, p, T). happens(e1, 1). happens(e2, 2).");
  EXPECT_FALSE(holds_at(kb, T("p"), at(3)));
  EXPECT_TRUE(holds_at(kb, T("p"), at(2)));
}

TEST(HoldsAt, InitiallyUntilClipped) {
  KnowledgeBase kb;
  kb.add_text("t", "initially(escl_lv(0)). terminates(outage, escl_lv(0), T). happens(outage, 50).");
  EXPECT_TRUE(holds_at(kb, T("escl_lv(0)"), at(10)));
  EXPECT_TRUE(holds_at(kb, T("escl_lv(0)"), at(50)));
  EXPECT_FALSE(holds_at(kb, T("escl_lv(0)"), at(51)));
}

TEST(HoldsAt, OpenFluentBindsAnswers) {
  KnowledgeBase kb;
  kb.add_text("t", "initiates(set(X), level(X), T). happens(set(1), 1). happens(set(2), 2).");
  auto ans = kb.query(T("holdsAt(level(L), 5)"));
  std::set<Term, TermLess> levels;
  for (const auto& s : ans) levels.insert(apply(s, T("L")));
  EXPECT_EQ(levels, (std::set<Term, TermLess>{T("1"), T("2")}));
}

TEST(HoldsAt, GuardedEffectAxioms) {
  KnowledgeBase kb;
  kb.add_text("t", "initiates(switch(X), on, T) :- X > 2. happens(switch(1), 1). happens(switch(5), 4).");
  EXPECT_FALSE(holds_at(kb, T("on"), at(3)));
  EXPECT_TRUE(holds_at(kb, T("on"), at(5)));
}

TEST(Clipped, StrictWindow) {
  KnowledgeBase kb;
  kb.add_text("t", "terminates(e2, p, T). initiates(e1, p, T). happens(e2, 5).");
  EXPECT_TRUE(clipped(kb, at(1), T("p"), at(9)));
  EXPECT_FALSE(clipped(kb, at(5), T("p"), at(9)));
  EXPECT_FALSE(clipped(kb, at(1), T("p"), at(5)));
  KnowledgeBase later;
  later.add_text("t", "terminates(e2, p, T). happens(e2, 10).");
  EXPECT_FALSE(clipped(later, at(1), T("p"), at(9)));
  kb.add_text("u", "happens(e1, 7).");
  EXPECT_TRUE(declipped(kb, at(1), T("p"), at(9)));
  EXPECT_FALSE(declipped(kb, at(7), T("p"), at(9)));
}

// Naive reading of the axioms: some initiation strictly before t that no
// termination strictly between clips, or `initially` with no termination before t.
struct EcOracle {
  std::vector<std::pair<int, std::int64_t>> happens;  // (event, time)
  std::map<int, std::set<char>> init, term;
  std::set<char> initially;

  bool holds(char f, std::int64_t t) const {
    auto clipped = [&](std::optional<std::int64_t> t0) {
      for (auto [e, te] : happens) {
        if (term.count(e) && term.at(e).count(f) && (!t0 || *t0 < te) && te < t) return true;
      }
      return false;
    };
    if (initially.count(f) && !clipped(std::nullopt)) return true;
    for (auto [e, te] : happens) {
      if (init.count(e) && init.at(e).count(f) && te < t && !clipped(te)) return true;
    }
    return false;
  }
};

TEST(HoldsAt, RandomTheoriesMatchNaiveAxioms) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> ev(0, 3), tm(1, 10), coin(0, 3);
  const std::string fluents = "pq";
  for (int round = 0; round < 300; ++round) {
    EcOracle o;
    std::string text;
    for (int e = 0; e < 4; ++e) {
      for (char f : fluents) {
        int c = coin(rng);
        if (c == 0) {
          o.init[e].insert(f);
          text += "initiates(e" + std::to_string(e) + ", " + f + ", T).\n";
        } else if (c == 1) {
          o.term[e].insert(f);
          text += "terminates(e" + std::to_string(e) + ", " + f + ", T).\n";
        }
      }
    }
    if (coin(rng) == 0) {
      o.initially.insert('q');
      text += "initially(q).\n";
    }
    int n = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int k = 0; k < n; ++k) {
      int e = ev(rng);
      auto t = tm(rng);
      o.happens.emplace_back(e, t);
      text += "happens(e" + std::to_string(e) + ", " + std::to_string(t) + ").\n";
    }
    KnowledgeBase kb;
    ASSERT_TRUE(kb.add_text("t", text).ok());
    for (char f : fluents) {
      for (std::int64_t t = 0; t <= 12; ++t) {
        EXPECT_EQ(holds_at(kb, Term::constant(std::string(1, f)), at(t)), o.holds(f, t))
            << f << " at " << t << "\n"
            << text;
      }
    }
  }
}

TEST(HoldsInterval, PaperDatetimeExample) {
  KnowledgeBase kb;
  kb.add_text("eis(a)", "occurs(a, datetime(2005, 1, 1, 0, 0, 1)).");
  kb.add_text("eis(b)", "occurs(b, datetime(2005, 1, 1, 0, 0, 10)).");
  auto v = holds_interval_free(kb, T("a"), T("b"), {});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].start(), from_civil(2005, 1, 1, 0, 0, 1));
  EXPECT_EQ(v[0].end(), from_civil(2005, 1, 1, 0, 0, 10));
  auto ans = kb.query(T("holdsInterval([a, b], Interval)"));
  ASSERT_EQ(ans.size(), 1u);
  EXPECT_EQ(apply(ans[0], T("Interval")), T("[datetime(2005,1,1,0,0,1), datetime(2005,1,1,0,0,10)]"));
}

TEST(HoldsInterval, TerminatorBreaks) {
  KnowledgeBase kb;
  kb.add_text("e", "occurs(a, 1). occurs(c, 3). occurs(b, 5).");
  EXPECT_TRUE(holds_interval_free(kb, T("a"), T("b"), {T("c")}).empty());
  EXPECT_EQ(holds_interval_free(kb, T("a"), T("b"), {}).size(), 1u);
  EXPECT_TRUE(broken(kb, at(1), T("a"), T("b"), at(5), {T("c")}));
  EXPECT_FALSE(broken(kb, at(1), T("a"), T("b"), at(3), {T("c")}));
  EXPECT_FALSE(broken(kb, at(1), T("a"), T("b"), at(5), {}));
}

TEST(HoldsInterval, GlobalTerminatorClauses) {
  KnowledgeBase kb;
  kb.add_text("e", "occurs(a, 1). occurs(c, 3). occurs(b, 5). terminates(c, [a, b], T).");
  EXPECT_TRUE(broken(kb, at(1), T("a"), T("b"), at(5), {}));
  EXPECT_TRUE(holds_interval_free(kb, T("a"), T("b"), {}).empty());
}

TEST(HoldsInterval, BoundWindow) {
  KnowledgeBase kb;
  kb.add_text("e", "occurs(a, 2). occurs(b, 4).");
  EXPECT_TRUE(holds_interval_bound(kb, T("a"), T("b"), TimeInterval{at(1), at(5)}, {}));
  KnowledgeBase late;
  late.add_text("e", "occurs(a, 2). occurs(b, 6).");
  EXPECT_FALSE(holds_interval_bound(late, T("a"), T("b"), TimeInterval{at(1), at(5)}, {}));
  KnowledgeBase cut;
  cut.add_text("e", "occurs(a, 2). occurs(x, 3). occurs(b, 4).");
  EXPECT_FALSE(holds_interval_bound(cut, T("a"), T("b"), TimeInterval{at(1), at(5)}, {T("x")}));
}

// Free intervals against exhaustive pair enumeration; bound against free.
TEST(HoldsInterval, RandomEisMatchesPairEnumeration) {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> sym(0, 2), len(0, 8), gap(0, 1);
  for (int round = 0; round < 400; ++round) {
    std::vector<std::pair<char, std::int64_t>> eis;
    std::int64_t t = 1;
    int n = len(rng);
    std::string text;
    for (int i = 0; i < n; ++i) {
      if (i) t += gap(rng);
      char c = "abc"[sym(rng)];
      eis.emplace_back(c, t);
      text += std::string("occurs(") + c + ", " + std::to_string(t) + ").\n";
    }
    KnowledgeBase kb;
    kb.add_text("eis", text);
    bool use_term = round % 2;
    std::vector<TimeInterval> want;
    for (std::size_t i = 0; i < eis.size(); ++i) {
      for (std::size_t j = 0; j < eis.size(); ++j) {
        if (eis[i].first != 'a' || eis[j].first != 'b' || eis[i].second > eis[j].second) continue;
        bool br = false;
        for (const auto& [c, tc] : eis) {
          if (use_term && c == 'c' && eis[i].second < tc && tc < eis[j].second) br = true;
        }
        if (!br) want.emplace_back(at(eis[i].second), at(eis[j].second));
      }
    }
    std::vector<Term> terms;
    if (use_term) terms.push_back(T("c"));
    auto got = holds_interval_free(kb, T("a"), T("b"), terms);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want) << text;
    for (std::int64_t lo = 0; lo <= 4; ++lo) {
      for (std::int64_t hi = lo; hi <= 9; hi += 3) {
        TimeInterval w{at(lo), at(hi)};
        bool inside = std::any_of(want.begin(), want.end(),
                                  [&](const TimeInterval& i) { return w.start() <= i.start() && i.end() <= w.end(); });
        EXPECT_EQ(holds_interval_bound(kb, T("a"), T("b"), w, terms), inside) << text;
      }
    }
  }
}

TEST(ValueAt, ElapsedTrajectory) {
  KnowledgeBase kb;
  kb.add_text("t",
              "initiates(outage, escl_lv(1), T). happens(outage, 2006-01-02T09:00:00Z). "
              "trajectory(escl_lv(1), T1, deadline, T2, (T2 - T1)).");
  TimePoint t0 = *parse_iso8601("2006-01-02T09:00:00Z");
  auto v = value_at(kb, T("deadline"), t0 + Timespan::from_millis(7000));
  ASSERT_TRUE(v);
  EXPECT_EQ(as_integer(*v), 7000);
  EXPECT_FALSE(value_at(kb, T("deadline"), t0));
  EXPECT_FALSE(value_at(kb, T("other"), t0 + Timespan::from_millis(7000)));
}

TEST(ValueAt, ConstantTrajectory) {
  KnowledgeBase kb;
  kb.add_text("t", "initiates(go, running, T). happens(go, 10). trajectory(running, T1, rate, T2, 5).");
  EXPECT_EQ(value_at(kb, T("rate"), at(11)), T("5"));
  EXPECT_EQ(value_at(kb, T("rate"), at(500)), T("5"));
  EXPECT_FALSE(value_at(kb, T("rate"), at(10)));
}

TEST(DerivedHappens, ElapsedAndExceeded) {
  KnowledgeBase kb;
  kb.add_text("t",
              "initiates(outage, escl_lv(1), T). happens(outage, 2006-01-02T09:00:00Z). "
              "trajectory(escl_lv(1), T1, deadline, T2, (T2 - T1)). "
              "time_to_repair(timespan(0,0,0,10)). ttr_max(timespan(0,0,1,0)). "
              "happens(elapsed, T) :- time_to_repair(TTR), valueAt(deadline, T, TTR). "
              "terminates(elapsed, escl_lv(1), T). initiates(elapsed, escl_lv(2), T). "
              "happens(exceeded, T) :- happens(elapsed, T1), ttr_max(M), T = T1 + M.");
  auto el = kb.query(T("happens(elapsed, T)"));
  ASSERT_EQ(el.size(), 1u);
  EXPECT_EQ(as_time_point(apply(el[0], T("T"))), parse_iso8601("2006-01-02T09:00:10Z"));
  auto ex = kb.query(T("happens(exceeded, T)"));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(as_time_point(apply(ex[0], T("T"))), parse_iso8601("2006-01-02T09:01:10Z"));
  // derived events drive fluents like stored ones
  EXPECT_TRUE(holds_at(kb, T("escl_lv(1)"), *parse_iso8601("2006-01-02T09:00:10Z")));
  EXPECT_TRUE(holds_at(kb, T("escl_lv(2)"), *parse_iso8601("2006-01-02T09:00:11Z")));
  EXPECT_FALSE(holds_at(kb, T("escl_lv(1)"), *parse_iso8601("2006-01-02T09:00:11Z")));
}

TEST(DerivedHappens, NoTrajectoryNoEvent) {
  KnowledgeBase kb;
  kb.add_text("t",
              "trajectory(escl_lv(1), T1, deadline, T2, (T2 - T1)). time_to_repair(10). "
              "happens(elapsed, T) :- time_to_repair(TTR), valueAt(deadline, T, TTR).");
  EXPECT_TRUE(kb.query(T("happens(elapsed, T)")).empty());
}

}  // namespace
