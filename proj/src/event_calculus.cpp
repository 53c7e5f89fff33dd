#include "reactlog/event_calculus.hpp"

#include <algorithm>

#include "reactlog/syntax.hpp"

namespace reactlog {

std::optional<TimeInterval> interval_from_term(const Term& t) {
  if (t.is_list()) {
    if (t.arity() != 2) return std::nullopt;
    auto a = as_time_point(t.arg(0));
    auto b = as_time_point(t.arg(1));
    if (!a || !b || *b < *a) return std::nullopt;
    return TimeInterval{*a, *b};
  }
  auto p = as_time_point(t);
  if (!p) return std::nullopt;
  return TimeInterval::at(*p);
}

Term time_term_like(const Term& like, TimePoint t) {
  if (like.is_literal() && std::holds_alternative<std::int64_t>(like.value())) return Term::integer(t.millis);
  return Term::datetime(t);
}

namespace {

bool occurrence_from(const Term& event, const Term& time, Occurrence::Kind kind, Occurrence& out) {
  auto iv = interval_from_term(time);
  if (!iv) return false;
  out.event = event;
  out.interval = *iv;
  if (time.is_list()) {
    out.start_term = time.arg(0);
    out.end_term = time.arg(1);
  } else {
    out.start_term = time;
    out.end_term = time;
  }
  out.kind = kind;
  return true;
}

bool same_instance(const Occurrence& a, const Occurrence& b) {
  if (a.seq != 0 || b.seq != 0) return a.seq == b.seq;
  return a.interval == b.interval && a.event == b.event;
}

bool strictly_inside(const TimeInterval& iv, TimePoint t1, TimePoint t2) { return t1 < iv.start() && iv.end() < t2; }

}  // namespace

bool for_each_occurrence(Solver& sv, const Term& pattern, const Substitution& s, OccurrenceScope scope,
                         const OccurrenceFn& fn) {
  StatePtr view = sv.view_ptr();
  struct Source {
    const char* functor;
    Occurrence::Kind kind;
  };
  std::vector<Source> sources;
  if (scope != OccurrenceScope::persistent) sources.push_back({"occurs", Occurrence::Kind::transient});
  if (scope != OccurrenceScope::transient) sources.push_back({"happens", Occurrence::Kind::persistent});

  for (const auto& src : sources) {
    for (const auto& sc : view->clauses(src.functor, 2)) {
      if (!sc->clause.is_fact()) continue;
      sv.tick();
      Term head = sc->clause.head;
      if (!head.is_ground()) head = rename_apart(head, sv.fresh_suffix());
      auto u = unify(pattern, head.arg(0), s);
      if (!u) continue;
      Occurrence occ;
      if (!occurrence_from(apply(*u, head.arg(0)), apply(*u, head.arg(1)), src.kind, occ)) continue;
      occ.seq = sc->seq;
      occ.eis_key = sc->update_id;
      if (!fn(occ, *u)) return false;
    }
  }
  // Derived occurrences: rules with an occurs/happens head.
  for (const auto& src : sources) {
    for (const auto& sc : view->clauses(src.functor, 2)) {
      if (sc->clause.is_fact()) continue;
      std::string suffix = sv.fresh_suffix();
      Term time_var = Term::variable("T" + suffix + "t");
      Term goal = Term::compound(src.functor, {pattern, time_var});
      auto u = unify(rename_apart(sc->clause.head, suffix), goal, s);
      if (!u) continue;
      std::vector<Term> body;
      for (const auto& g : sc->clause.body) body.push_back(rename_apart(g, suffix));
      bool go_on = sv.solve_all(body, *u, [&](const Substitution& s2) {
        Occurrence occ;
        if (!occurrence_from(apply(s2, pattern), apply(s2, time_var), src.kind, occ)) return true;
        return fn(occ, s2);
      });
      if (!go_on) return false;
    }
  }
  return true;
}

bool ec_holds(Solver& sv, const Term& fluent, TimePoint t, bool through, bool every_initiation,
              const std::function<bool(const FluentAnswer&)>& fn) {
  std::vector<Occurrence> events;
  for_each_occurrence(sv, Term::variable("E#ev"), Substitution{}, OccurrenceScope::persistent,
                      [&](const Occurrence& o, const Substitution&) {
                        TimePoint at = o.interval.end();
                        if (through ? at <= t : at < t) events.push_back(o);
                        return true;
                      });
  std::stable_sort(events.begin(), events.end(), [](const Occurrence& a, const Occurrence& b) {
    return a.interval.end() > b.interval.end();
  });

  const bool ground = fluent.is_ground();
  // Terminations seen so far; all of them lie after the events still to visit.
  std::vector<Term> terminated;
  bool any_termination = false;
  std::vector<Term> reported;
  auto clipped_later = [&](const Term& f) {
    if (ground) return any_termination;
    return std::any_of(terminated.begin(), terminated.end(), [&](const Term& x) {
      return unify(rename_apart(x, "#c"), f).has_value();
    });
  };
  auto fresh = [&](const Term& f) {
    if (every_initiation) return true;
    for (const auto& r : reported) {
      if (is_variant(r, f)) return false;
    }
    reported.push_back(f);
    return true;
  };

  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    while (j < events.size() && events[j].interval.end() == events[i].interval.end()) ++j;
    bool stop = false;
    bool caller_stop = false;
    bool saw_clipped = false;
    for (std::size_t x = i; x < j && !stop; ++x) {
      const Occurrence& o = events[x];
      sv.solve(Term::compound("initiates", {o.event, fluent, o.end_term}), Substitution{},
               [&](const Substitution& s1) {
                 Term f = apply(s1, fluent);
                 if (clipped_later(f)) {
                   saw_clipped = true;
                   return !ground;
                 }
                 if (!fresh(f)) return true;
                 if (!fn(FluentAnswer{f, o.interval.end(), o.end_term})) {
                   stop = caller_stop = true;
                   return false;
                 }
                 if (ground && !every_initiation) {
                   stop = true;
                   return false;
                 }
                 return true;
               });
    }
    if (stop) return !caller_stop;
    // A ground fluent clipped after its latest initiation is clipped after every earlier one.
    if (ground && saw_clipped) return true;
    for (std::size_t x = i; x < j; ++x) {
      const Occurrence& o = events[x];
      sv.solve(Term::compound("terminates", {o.event, fluent, o.end_term}), Substitution{},
               [&](const Substitution& s1) {
                 any_termination = true;
                 if (ground) return false;
                 terminated.push_back(apply(s1, fluent));
                 return true;
               });
    }
    i = j;
  }

  bool go_on = true;
  sv.solve(Term::compound("initially", {fluent}), Substitution{}, [&](const Substitution& s1) {
    Term f = apply(s1, fluent);
    if (clipped_later(f)) return !ground;
    if (!fresh(f)) return true;
    if (!fn(FluentAnswer{f, std::nullopt, Term()})) {
      go_on = false;
      return false;
    }
    return !ground;
  });
  return go_on;
}

bool ec_clipped(Solver& sv, std::optional<TimePoint> t1, const Term& fluent, TimePoint t2, bool declipped) {
  bool found = false;
  const char* axiom = declipped ? "initiates" : "terminates";
  for_each_occurrence(sv, Term::variable("E#cl"), Substitution{}, OccurrenceScope::persistent,
                      [&](const Occurrence& o, const Substitution&) {
                        TimePoint at = o.interval.end();
                        if ((t1 && at <= *t1) || at >= t2) return true;
                        found = sv.provable(Term::compound(axiom, {o.event, fluent, o.end_term}));
                        return !found;
                      });
  return found;
}

namespace {

bool occurs_inside(Solver& sv, const Term& pattern, TimePoint t1, TimePoint t2) {
  bool found = false;
  for_each_occurrence(sv, pattern, Substitution{}, OccurrenceScope::both, [&](const Occurrence& o, const Substitution&) {
    found = strictly_inside(o.interval, t1, t2);
    return !found;
  });
  return found;
}

}  // namespace

bool ec_broken(Solver& sv, TimePoint t1, const Term& e1, const Term& e2, TimePoint t2, const std::vector<Term>& local) {
  if (!(t1 < t2)) return false;
  for (const auto& p : local) {
    if (occurs_inside(sv, p, t1, t2)) return true;
  }
  // Global terminators: terminates(X, [E1,E2], [T1,T2]).
  if (sv.view().clauses("terminates", 3).empty()) return false;
  Term x = Term::variable("X#term");
  Term goal = Term::compound("terminates", {x, Term::list({e1, e2}),
                                            Term::list({Term::integer(t1.millis), Term::integer(t2.millis)})});
  bool found = false;
  sv.solve_clauses(goal, Substitution{}, [&](const Substitution& s1) {
    Term terminator = apply(s1, x);
    if (terminator.is_variable()) return true;
    found = occurs_inside(sv, terminator, t1, t2);
    return !found;
  });
  return found;
}

bool ec_intervals(Solver& sv, const Term& e1, const Term& e2, const std::vector<Term>& local, const Substitution& s,
                  const std::function<bool(const Occurrence&, const Occurrence&, const Substitution&)>& fn) {
  return for_each_occurrence(sv, e1, s, OccurrenceScope::both, [&](const Occurrence& o1, const Substitution& s1) {
    return for_each_occurrence(sv, e2, s1, OccurrenceScope::both, [&](const Occurrence& o2, const Substitution& s2) {
      if (same_instance(o1, o2) || !interval_leq(o1.interval, o2.interval)) return true;
      std::vector<Term> terms;
      terms.reserve(local.size());
      for (const auto& l : local) terms.push_back(apply(s2, l));
      if (ec_broken(sv, o1.interval.end(), apply(s2, e1), apply(s2, e2), o2.interval.start(), terms)) return true;
      return fn(o1, o2, s2);
    });
  });
}

// ---------------------------------------------------------------------------
// Builtins

namespace {

using Cont = Solver::Cont;

std::vector<Term> term_list(const Term& t) {
  if (t.is_list()) return {t.args().begin(), t.args().end()};
  return {t};
}

bool hold_at_builtin(Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
  const Term& fluent = a[0];
  const Term& time = a[1];
  Substitution base = s;
  TimePoint t;
  bool through = false;
  bool evaluated = true;
  if (time.is_variable()) {
    t = sv.now();
    through = true;
    auto u = unify(time, sv.time_term(t), s);
    if (!u) return true;
    base = *u;
  } else if (auto tp = as_time_point(time)) {
    t = *tp;
  } else {
    evaluated = false;
  }
  if (evaluated) {
    bool go_on = ec_holds(sv, fluent, t, through, false, [&](const FluentAnswer& fa) {
      auto u = unify(fluent, fa.fluent, base);
      return u ? k(*u) : true;
    });
    if (!go_on) return false;
  }
  // Fluents defined directly by holdsAt/2 rules.
  if (sv.view().clauses("holdsAt", 2).empty()) return true;
  return sv.solve_clauses(Term::compound("holdsAt", {fluent, time}), s, k);
}

bool clipped_builtin(Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k, bool declip) {
  auto t2 = as_time_point(a[2]);
  if (!t2) return true;
  std::optional<TimePoint> t1;
  if (!(a[0].is_constant() && a[0].name() == "-inf")) {
    t1 = as_time_point(a[0]);
    if (!t1) return true;
  }
  return ec_clipped(sv, t1, a[1], *t2, declip) ? k(s) : true;
}

// holdsInterval(Pair, Interval[, Terminators]).
bool holds_interval_builtin(Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
  const Term& pair = a[0];
  const Term& interval = a[1];
  if (!pair.is_list()) {
    // holdsInterval(sequence(a,b), T): a complex event definition.
    return sv.solve(Term::compound("event", {pair, interval}), s, k);
  }
  std::vector<Term> local = a.size() > 2 ? term_list(a[2]) : std::vector<Term>{};
  std::optional<TimePoint> w1;
  std::optional<TimePoint> w2;
  if (interval.is_list() && interval.arity() == 2) {
    w1 = as_time_point(interval.arg(0));
    w2 = as_time_point(interval.arg(1));
  } else if (!interval.is_variable()) {
    return true;
  }
  const bool bound = w1 && w2;

  if (pair.arity() == 1) {
    bool stopped = false;
    for_each_occurrence(sv, pair.arg(0), s, OccurrenceScope::both, [&](const Occurrence& o, const Substitution& s1) {
      if ((w1 && o.interval.start() < *w1) || (w2 && o.interval.end() > *w2)) return true;
      if (bound) {
        stopped = !k(s1);
        return false;
      }
      auto u = unify(interval, Term::list({o.start_term, o.end_term}), s1);
      if (u && !k(*u)) {
        stopped = true;
        return false;
      }
      return true;
    });
    return !stopped;
  }
  if (pair.arity() != 2) return true;
  bool stopped = false;
  ec_intervals(sv, pair.arg(0), pair.arg(1), local, s, [&](const Occurrence& o1, const Occurrence& o2,
                                                          const Substitution& s1) {
    if ((w1 && o1.interval.start() < *w1) || (w2 && o2.interval.end() > *w2)) return true;
    if (bound) {
      // Existence only: one answer for a fully bound window.
      stopped = !k(s1);
      return false;
    }
    auto u = unify(interval, Term::list({o1.start_term, o2.end_term}), s1);
    if (!u) return true;
    if (!k(*u)) {
      stopped = true;
      return false;
    }
    return true;
  });
  return !stopped;
}

bool broken_builtin(Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
  auto t1 = as_time_point(a[0]);
  auto t2 = as_time_point(a[2]);
  const Term& pair = a[1];
  if (!t1 || !t2 || !pair.is_list() || pair.arity() != 2) return true;
  std::vector<Term> local = a.size() > 3 ? term_list(a[3]) : std::vector<Term>{};
  return ec_broken(sv, *t1, pair.arg(0), pair.arg(1), *t2, local) ? k(s) : true;
}

struct Trajectory {
  Term fluent, t1, t2, expr;
};

std::vector<Trajectory> trajectories(Solver& sv, const Term& param) {
  std::vector<Trajectory> out;
  Term f = Term::variable("F#tr");
  Term t1 = Term::variable("T1#tr");
  Term t2 = Term::variable("T2#tr");
  Term e = Term::variable("E#tr");
  sv.solve(Term::compound("trajectory", {f, t1, param, t2, e}), Substitution{}, [&](const Substitution& s1) {
    out.push_back({apply(s1, f), apply(s1, t1), apply(s1, t2), apply(s1, e)});
    return true;
  });
  return out;
}

// Evaluates a trajectory expression with T1/T2 bound to time terms.
std::optional<Term> trajectory_value(const Trajectory& tr, const Term& since, const Term& at) {
  Substitution b;
  if (tr.t1.is_variable()) b.bind(tr.t1.name(), since);
  if (tr.t2.is_variable()) b.bind(tr.t2.name(), at);
  Term expr = apply(b, tr.expr);
  if (auto v = eval_arith(expr)) return v;
  return expr;
}

bool same_value(const Term& a, const Term& b) {
  auto ea = eval_arith(a);
  auto eb = eval_arith(b);
  if (ea && eb) {
    auto o = compare_values(*ea, *eb);
    if (o) return *o == 0;
  }
  return compare_terms(a, b) == 0;
}

bool value_at_builtin(Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
  const Term& param = a[0];
  const Term& time = a[1];
  const Term& value = a[2];
  auto emit = [&](const Term& t_term, const Term& v, const Substitution& base) {
    Substitution s1 = base;
    if (time.is_variable()) {
      auto u = unify(time, t_term, s1);
      if (!u) return true;
      s1 = *u;
    }
    if (value.is_variable()) {
      auto u = unify(value, v, s1);
      return u ? k(*u) : true;
    }
    return same_value(value, v) ? k(s1) : true;
  };

  for (const auto& tr : trajectories(sv, param)) {
    if (!time.is_variable()) {
      auto t = as_time_point(time);
      if (!t) return true;
      bool go_on = ec_holds(sv, tr.fluent, *t, false, true, [&](const FluentAnswer& fa) {
        if (!fa.since) return true;
        auto v = trajectory_value(tr, fa.since_term, time_term_like(fa.since_term, *t));
        return v ? emit(time, *v, s) : true;
      });
      if (!go_on) return false;
      continue;
    }
    const bool elapsed_form = tr.expr.has_functor("-", 2) && tr.expr.arg(0) == tr.t2 && tr.expr.arg(1) == tr.t1 &&
                              tr.t1.is_variable() && tr.t2.is_variable();
    if (!value.is_variable() && elapsed_form) {
      // Inversion: the time at which the elapsed value reaches `value`.
      auto v = eval_arith(value);
      auto span = v ? as_integer(*v) : std::nullopt;
      if (!span) continue;
      std::vector<std::pair<Term, TimePoint>> seen;
      bool stopped = false;
      for_each_occurrence(sv, Term::variable("E#va"), Substitution{}, OccurrenceScope::persistent,
                          [&](const Occurrence& o, const Substitution&) {
                            TimePoint since = o.interval.end();
                            TimePoint at{since.millis + *span};
                            sv.solve(Term::compound("initiates", {o.event, tr.fluent, o.end_term}), Substitution{},
                                     [&](const Substitution& s1) {
                                       Term f = apply(s1, tr.fluent);
                                       for (const auto& [sf, st] : seen) {
                                         if (st == at && sf == f) return true;
                                       }
                                       seen.emplace_back(f, at);
                                       bool holds_since = false;
                                       ec_holds(sv, f, at, false, true, [&](const FluentAnswer& fa) {
                                         holds_since = fa.since && *fa.since == since;
                                         return !holds_since;
                                       });
                                       if (!holds_since) return true;
                                       if (!emit(time_term_like(o.end_term, at), value, s)) {
                                         stopped = true;
                                         return false;
                                       }
                                       return true;
                                     });
                            return !stopped;
                          });
      if (stopped) return false;
      continue;
    }
    // Free time otherwise means the current value.
    TimePoint now = sv.now();
    Term now_term = sv.time_term(now);
    bool go_on = ec_holds(sv, tr.fluent, now, true, true, [&](const FluentAnswer& fa) {
      if (!fa.since) return true;
      auto v = trajectory_value(tr, fa.since_term, time_term_like(fa.since_term, now));
      return v ? emit(now_term, *v, s) : true;
    });
    if (!go_on) return false;
  }
  return true;
}

}  // namespace

void install_event_calculus_builtins(BuiltinTable& t) {
  t.add("holdsAt", 2, hold_at_builtin, true);
  t.add("clipped", 3, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return clipped_builtin(sv, a, s, k, false);
  }, true);
  t.add("declipped", 3, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return clipped_builtin(sv, a, s, k, true);
  }, true);
  t.add("holdsInterval", 2, holds_interval_builtin, true);
  t.add("holdsInterval", 3, holds_interval_builtin, true);
  t.add("broken", 3, broken_builtin, true);
  t.add("broken", 4, broken_builtin, true);
  t.add("valueAt", 3, value_at_builtin, true);
}

// ---------------------------------------------------------------------------
// Knowledge base level

namespace {

template <typename F>
auto with_solver(KnowledgeBase& kb, const QueryOptions& options, F&& f) {
  StatePtr view = options.txn ? kb.transaction_state(*options.txn) : kb.snapshot();
  Solver sv(kb, view, options);
  return f(sv);
}

}  // namespace

bool holds_at(KnowledgeBase& kb, const Term& fluent, TimePoint t, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) {
    return sv.provable(Term::compound("holdsAt", {fluent, Term::integer(t.millis)}));
  });
}

bool clipped(KnowledgeBase& kb, TimePoint t1, const Term& fluent, TimePoint t2, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) { return ec_clipped(sv, t1, fluent, t2, false); });
}

bool declipped(KnowledgeBase& kb, TimePoint t1, const Term& fluent, TimePoint t2, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) { return ec_clipped(sv, t1, fluent, t2, true); });
}

std::vector<TimeInterval> holds_interval_free(KnowledgeBase& kb, const Term& e1, const Term& e2,
                                              const std::vector<Term>& terminators, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) {
    std::vector<TimeInterval> out;
    ec_intervals(sv, e1, e2, terminators, Substitution{},
                 [&](const Occurrence& o1, const Occurrence& o2, const Substitution&) {
                   out.emplace_back(o1.interval.start(), o2.interval.end());
                   return true;
                 });
    return out;
  });
}

bool holds_interval_bound(KnowledgeBase& kb, const Term& e1, const Term& e2, const TimeInterval& window,
                          const std::vector<Term>& terminators, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) {
    bool found = false;
    ec_intervals(sv, e1, e2, terminators, Substitution{},
                 [&](const Occurrence& o1, const Occurrence& o2, const Substitution&) {
                   found = o1.interval.start() >= window.start() && o2.interval.end() <= window.end();
                   return !found;
                 });
    return found;
  });
}

bool broken(KnowledgeBase& kb, TimePoint t1, const Term& e1, const Term& e2, TimePoint t2,
            const std::vector<Term>& local_terminators, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) { return ec_broken(sv, t1, e1, e2, t2, local_terminators); });
}

std::optional<Term> value_at(KnowledgeBase& kb, const Term& parameter, TimePoint t, const QueryOptions& options) {
  return with_solver(kb, options, [&](Solver& sv) -> std::optional<Term> {
    Term v = Term::variable("V#value");
    auto s = sv.first(Term::compound("valueAt", {parameter, Term::integer(t.millis), v}));
    if (!s) return std::nullopt;
    return apply(*s, v);
  });
}

}  // namespace reactlog
