#pragma once
// Randomized engine properties. Each check runs `cases` generated cases and
// reports how many failed together with the first counterexample.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle/algebra_oracle.hpp"
#include "oracle/engine_adapter.hpp"
#include "reactlog/eca_engine.hpp"
#include "reactlog/syntax.hpp"

namespace props {

using namespace reactlog;

struct Result {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first;

  void fail(std::string why) {
    if (failures++ == 0) first = std::move(why);
  }
  [[nodiscard]] bool ok() const { return failures == 0; }
};

class Gen {
 public:
  explicit Gen(unsigned seed) : rng_(seed) {}

  int roll(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin() { return roll(2) == 1; }

  // p/1, q/1, r/1 over 1..3, each fact present with probability 1/2.
  std::string store() {
    std::string s;
    for (const char* pred : {"p", "q", "r"})
      for (int i = 1; i <= 3; ++i)
        if (coin()) s += std::string(pred) + "(" + std::to_string(i) + "). ";
    return s;
  }

  std::string goal() {
    static const char* pool[] = {"p(X)", "q(X)", "(p(X), q(X))", "not(r(1))", "r(2)", "p(1)", "(q(X), not(r(X)))", "fail"};
    return pool[roll(8)];
  }

  oracle::Expr expr(int depth) {
    using namespace oracle;
    auto atom = [&] { return A(static_cast<char>('a' + roll(3))); };
    if (depth == 0) return atom();
    switch (roll(9)) {
      case 0: return atom();
      case 1: return Seq({expr(depth - 1), expr(depth - 1)});
      case 2: return Or({expr(depth - 1), expr(depth - 1)});
      case 3: return Xor({expr(depth - 1), expr(depth - 1)});
      case 4: return And({expr(depth - 1), expr(depth - 1)});
      case 5: return Conc({expr(depth - 1), expr(depth - 1)});
      case 6: return Neg({static_cast<char>('a' + roll(3))}, atom(), atom());
      case 7: return Any(1 + roll(2), expr(depth - 1));
      default: return Aper(atom(), atom(), atom());
    }
  }

  oracle::Eis eis() {
    oracle::Eis e;
    int n = 1 + roll(6);
    std::int64_t t = 1;
    for (int i = 0; i < n; ++i) {
      e.push_back({static_cast<char>('a' + roll(3)), t});
      t += roll(3) == 0 ? 0 : 1;
    }
    return e;
  }

 private:
  std::mt19937 rng_;
};

inline EngineOptions serial_options() {
  EngineOptions o;
  o.serial = true;
  o.numeric_time = true;
  return o;
}

inline RunConfig cycles(std::size_t n) {
  RunConfig c;
  c.cycles = n;
  c.start = TimePoint{1000};
  c.poll = Timespan::from_millis(10);
  return c;
}

inline std::string outcome_text(const RuleOutcome& o) {
  std::string s = std::to_string(o.cycle) + (o.fired ? " fired" : " -") + (o.else_fired ? " else" : " -") + " runs=" +
                  std::to_string(o.action_runs);
  for (const auto& p : o.trace) s += " " + p;
  for (const auto& e : o.errors) s += " error:" + e;
  return s;
}

inline std::vector<std::string> answers(KnowledgeBase& kb, const std::string& goal) {
  std::vector<std::string> out;
  Term g = parse_term(goal);
  for (const auto& s : kb.query(g)) out.push_back(write_term(apply(s, g)));
  std::sort(out.begin(), out.end());
  return out;
}

/// A rule written with fewer parts behaves like its eca/6 form with blank
/// (`_` or `true`) parts in the missing positions.
inline Result blank_part_equivalence(std::size_t n, unsigned seed = 1) {
  Result res;
  Gen g(seed);
  for (std::size_t i = 0; i < n; ++i, ++res.cases) {
    std::string store = g.store();
    int arity = 1 + g.roll(6);
    // parts in eca/6 order: time, event, condition, action, post, else
    std::vector<std::string> part(6, "");
    auto blank = [&] { return g.coin() ? std::string("_") : std::string("true"); };
    const std::string action = "add(log, \"did.\")";
    switch (arity) {
      case 1: part = {"", "", "", action, "", ""}; break;
      case 2: part = {"", g.goal(), "", action, "", ""}; break;
      case 3: part = {"", g.goal(), g.goal(), action, "", ""}; break;
      case 4: part = {g.goal(), g.goal(), g.goal(), action, "", ""}; break;
      case 5: part = {g.goal(), g.goal(), g.goal(), action, g.coin() ? "!" : g.goal(), ""}; break;
      default:
        part = {g.goal(), g.goal(), g.goal(), action, g.coin() ? "!" : g.goal(), "add(log, \"other.\")"};
    }
    // blank out some of the written parts as well
    static const std::vector<std::vector<int>> positions = {{3}, {1, 3}, {1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3, 4},
                                                            {0, 1, 2, 3, 4, 5}};
    std::vector<int> written = positions[arity - 1];
    for (int k : written)
      if (k != 3 && g.roll(4) == 0) part[k] = blank();

    std::string short_form = "eca(";
    for (std::size_t k = 0; k < written.size(); ++k) short_form += (k ? ", " : "") + part[written[k]];
    short_form += ").";
    std::string full = "eca(";
    for (int k = 0; k < 6; ++k) full += (k ? ", " : "") + (part[k].empty() ? blank() : part[k]);
    full += ").";

    std::vector<std::string> outs[2], logs[2];
    const std::string* forms[2] = {&short_form, &full};
    for (int f = 0; f < 2; ++f) {
      KnowledgeBase kb;
      kb.add_text("store", store);
      kb.add_text("rule", *forms[f]);
      EcaEngine engine(kb, serial_options());
      for (const auto& o : engine.run(cycles(2)).outcomes) outs[f].push_back(outcome_text(o));
      logs[f] = answers(kb, "did");
      auto other = answers(kb, "other");
      logs[f].insert(logs[f].end(), other.begin(), other.end());
    }
    if (outs[0] != outs[1] || logs[0] != logs[1] || outs[0].size() != 2)
      res.fail(short_form + " vs " + full + " over " + store);
  }
  return res;
}

/// With a cut postcondition the action runs at most once per rule per
/// cycle, and it runs exactly when time, event and condition are jointly
/// provable.
inline Result cut_at_most_once(std::size_t n, unsigned seed = 2) {
  Result res;
  Gen g(seed);
  for (std::size_t i = 0; i < n; ++i, ++res.cases) {
    std::string store = g.store();
    std::string ev = g.goal(), cond = g.goal();
    std::string rule = "eca(_, " + ev + ", " + cond + ", add(log, \"ran(_0).\", [X]), !, _).";
    KnowledgeBase kb;
    kb.add_text("store", store);
    bool expected = kb.holds(parse_term("(" + ev + ", " + cond + ")"));
    kb.add_text("rule", rule);
    EcaEngine engine(kb, serial_options());
    auto report = engine.run(cycles(3));
    bool bad = report.outcomes.size() != 3;
    for (const auto& o : report.outcomes) {
      if (o.action_runs > 1 || o.fired != expected || (o.fired && o.action_runs != 1)) bad = true;
    }
    if (kb.query(parse_term("ran(_)")).size() != (expected ? 3u : 0u)) bad = true;
    if (bad) res.fail(rule + " over " + store);
  }
  return res;
}

/// Updates inside a rolled-back transaction leave every ground goal with
/// its previous answer. Half of the cases roll back directly, half through
/// a transactional ECA action that violates an integrity constraint or fails.
inline Result transaction_atomicity(std::size_t n, unsigned seed = 3) {
  Result res;
  Gen g(seed);
  std::vector<std::string> ground;
  for (const char* pred : {"f", "h"})
    for (int k = 1; k <= 4; ++k) ground.push_back(std::string(pred) + "(" + std::to_string(k) + ")");
  for (int t = 1; t <= 3; ++t) ground.push_back("occurs(a, " + std::to_string(t) + ")");
  auto observe = [&](KnowledgeBase& kb) {
    std::string s;
    for (const auto& q : ground) s += kb.holds(parse_term(q)) ? '1' : '0';
    for (const auto& a : answers(kb, "f(X)")) s += a;
    return s;
  };
  for (std::size_t i = 0; i < n; ++i, ++res.cases) {
    KnowledgeBase kb;
    for (int k = 1; k <= 4; ++k)
      if (g.coin()) kb.add_text("id" + std::to_string(g.roll(3)), "f(" + std::to_string(k) + ").");
    for (int t = 1; t <= 3; ++t)
      if (g.coin()) kb.add_text("eis(a)", "occurs(a, " + std::to_string(t) + ").");
    const std::string before = observe(kb);

    std::vector<std::string> ops;
    int m = 1 + g.roll(6);
    for (int k = 0; k < m; ++k) {
      std::string v = std::to_string(1 + g.roll(4));
      switch (g.roll(5)) {
        case 0: ops.push_back("add(id" + std::to_string(g.roll(4)) + ", \"f(" + v + "). h(" + v + ").\")"); break;
        case 1: ops.push_back("remove(id" + std::to_string(g.roll(4)) + ")"); break;
        case 2: ops.push_back("retractall(f(" + v + "))"); break;
        case 3: ops.push_back("consume(eis(a))"); break;
        default: ops.push_back("add(eis(a), \"occurs(a, " + v + ").\")");
      }
    }
    std::string seq;
    for (const auto& o : ops) seq += (seq.empty() ? "" : ", ") + o;

    if (g.coin()) {
      TxnId t = kb.begin_transaction();
      QueryOptions qo;
      qo.txn = t;
      kb.holds(parse_term("(" + seq + ")"), qo);
      kb.rollback(t);
      if (observe(kb) != before) res.fail("rollback of " + seq);
    } else {
      // either the last step fails or the result breaks `not(h(1))` after h(1) is forced in
      bool violate = g.coin();
      kb.add_text("ic", "integrity(not(h(1))).");
      std::string body = seq + (violate ? ", add(idv, \"h(1).\")" : ", fail");
      kb.add_text("rule", "eca(transaction((" + body + "))).");
      EcaEngine engine(kb, serial_options());
      auto report = engine.run(cycles(1));
      kb.remove_update("rule");
      kb.remove_update("ic");
      if (report.outcomes.size() != 1 || report.outcomes[0].fired || !report.outcomes[0].rolled_back)
        res.fail("transactional action committed: " + body);
      if (observe(kb) != before) res.fail("rule left changes: " + body);
    }
  }
  return res;
}

/// Consuming every key that contributed to a detection leaves nothing to
/// detect. Holds for expressions without xor and negation, where fewer
/// occurrences can only mean fewer detections.
inline bool monotone(const oracle::Expr& e) {
  if (e.op == oracle::Expr::xor_ || e.op == oracle::Expr::neg || e.op == oracle::Expr::aper) return false;
  for (const auto& i : e.items)
    if (!monotone(i)) return false;
  return true;
}

inline Result consumption_soundness(std::size_t n, unsigned seed = 4, bool only_monotone = true) {
  Result res;
  Gen g(seed);
  while (res.cases < n) {
    oracle::Expr shape = g.expr(2);
    if (only_monotone && !monotone(shape)) continue;
    ++res.cases;
    oracle::Eis eis = g.eis();
    bool strict = g.coin();
    EventExpr expr = parse_event_expr(shape.text());
    KnowledgeBase kb;
    oracle::load_eis(kb, eis);
    std::set<std::string> keys;
    for (const auto& d : detect(kb, expr, strict))
      for (const auto& c : d.contributors) keys.insert("eis(" + write_term(c.event) + ")");
    for (const auto& k : keys) kb.consume(k, ConsumptionPolicy::all);
    auto after = detect(kb, expr, strict);
    if (!after.empty()) res.fail(shape.text() + " on " + oracle::describe(eis) + (strict ? "strict" : "nonstrict"));
  }
  return res;
}

/// Repeated detect calls without store mutation return identical results
/// and leave the store untouched.
inline Result detect_purity(std::size_t n, unsigned seed = 5) {
  Result res;
  Gen g(seed);
  for (std::size_t i = 0; i < n; ++i, ++res.cases) {
    oracle::Expr shape = g.expr(2), other = g.expr(2);
    oracle::Eis eis = g.eis();
    bool strict = g.coin();
    KnowledgeBase kb;
    auto loaded = oracle::load_eis(kb, eis);
    EventExpr expr = parse_event_expr(shape.text()), expr2 = parse_event_expr(other.text());
    auto store_before = answers(kb, "occurs(E, T)");
    auto state_before = kb.snapshot();
    auto first = oracle::to_oracle(detect(kb, expr, strict), loaded);
    detect(kb, expr2, !strict);
    auto second = oracle::to_oracle(detect(kb, expr, strict), loaded);
    bool bad = first != second || answers(kb, "occurs(E, T)") != store_before || kb.snapshot() != state_before;
    if (bad) res.fail(shape.text() + " on " + oracle::describe(eis));
  }
  return res;
}

}  // namespace props
