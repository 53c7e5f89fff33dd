#include "reactlog/event_algebra.hpp"

#include <algorithm>

#include "reactlog/syntax.hpp"

namespace reactlog {

EventExpr EventExpr::make_atom(Term t) {
  EventExpr e;
  e.op = Op::atom;
  e.atom = std::move(t);
  return e;
}

bool operator==(const EventExpr& a, const EventExpr& b) {
  return a.op == b.op && a.atom == b.atom && a.items == b.items && a.forbidden == b.forbidden &&
         a.count == b.count && a.span == b.span;
}

const char* op_name(EventExpr::Op op) {
  switch (op) {
    case EventExpr::Op::atom: return "atom";
    case EventExpr::Op::sequence: return "sequence";
    case EventExpr::Op::or_: return "or";
    case EventExpr::Op::xor_: return "xor";
    case EventExpr::Op::and_: return "and";
    case EventExpr::Op::concurrent: return "concurrent";
    case EventExpr::Op::neg: return "neg";
    case EventExpr::Op::any: return "any";
    case EventExpr::Op::aperiodic: return "aperiodic";
    case EventExpr::Op::periodic: return "periodic";
  }
  return "?";
}

namespace {

const std::map<std::string, EventExpr::Op>& operator_table() {
  static const std::map<std::string, EventExpr::Op> table = {
      {"sequence", EventExpr::Op::sequence}, {"or", EventExpr::Op::or_},
      {"xor", EventExpr::Op::xor_},          {"and", EventExpr::Op::and_},
      {"concurrent", EventExpr::Op::concurrent}, {"neg", EventExpr::Op::neg},
      {"any", EventExpr::Op::any},           {"aperiodic", EventExpr::Op::aperiodic},
      {"periodic", EventExpr::Op::periodic},
  };
  return table;
}

[[noreturn]] void malformed(const Term& t, const std::string& why) {
  throw std::invalid_argument("malformed event expression " + write_term(t) + ": " + why);
}

std::pair<EventExpr, EventExpr> window_of(const Term& owner, const Term& w) {
  if (!w.is_list() || w.arity() != 2) malformed(owner, "window must be a two-element list [Open, Close]");
  return {parse_event_expr(w.arg(0)), parse_event_expr(w.arg(1))};
}

}  // namespace

bool is_algebra_functor(const Term& t) {
  return t.is_compound() && operator_table().contains(t.name());
}

EventExpr parse_event_expr(const Term& t) {
  if (t.is_variable()) malformed(t, "unbound event");
  if (t.is_literal()) malformed(t, "data literal is not an event");
  if (t.is_list()) {
    if (t.arity() != 1) malformed(t, "an event list must hold exactly one event");
    return parse_event_expr(t.arg(0));
  }
  if (!is_algebra_functor(t)) return EventExpr::make_atom(t);
  EventExpr e;
  e.op = operator_table().at(t.name());
  auto args = t.args();
  switch (e.op) {
    case EventExpr::Op::sequence:
    case EventExpr::Op::xor_:
    case EventExpr::Op::and_:
    case EventExpr::Op::concurrent:
      if (args.size() < 2) malformed(t, "needs at least two operands");
      [[fallthrough]];
    case EventExpr::Op::or_:
      if (args.empty()) malformed(t, "needs an operand");
      for (const auto& a : args) e.items.push_back(parse_event_expr(a));
      break;
    case EventExpr::Op::neg: {
      if (args.size() != 2) malformed(t, "neg takes forbidden events and a window");
      if (args[0].is_list()) {
        e.forbidden.assign(args[0].args().begin(), args[0].args().end());
      } else {
        e.forbidden.push_back(args[0]);
      }
      if (e.forbidden.empty()) malformed(t, "no forbidden events");
      auto [a, c] = window_of(t, args[1]);
      e.items = {a, c};
      break;
    }
    case EventExpr::Op::any: {
      if (args.size() != 2) malformed(t, "any takes a count and an event");
      auto n = as_integer(args[0]);
      if (!n || *n < 1) malformed(t, "count must be a positive integer");
      e.count = *n;
      e.items.push_back(parse_event_expr(args[1]));
      break;
    }
    case EventExpr::Op::aperiodic: {
      if (args.size() != 2) malformed(t, "aperiodic takes an event and a window");
      auto [a, c] = window_of(t, args[1]);
      e.items = {parse_event_expr(args[0]), a, c};
      break;
    }
    case EventExpr::Op::periodic: {
      if (args.size() != 2) malformed(t, "periodic takes a timespan and a window");
      auto span = as_timespan(args[0]);
      if (!span || span->total_millis() <= 0) malformed(t, "period must be a positive timespan");
      e.span = *span;
      auto [a, c] = window_of(t, args[1]);
      e.items = {a, c};
      break;
    }
    case EventExpr::Op::atom:
      break;
  }
  return e;
}

EventExpr parse_event_expr(std::string_view text) {
  Term t;
  try {
    t = parse_term(text);
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("malformed event expression: ") + e.what());
  }
  return parse_event_expr(t);
}

Term to_term(const EventExpr& e) {
  std::vector<Term> args;
  switch (e.op) {
    case EventExpr::Op::atom:
      return e.atom;
    case EventExpr::Op::neg:
      args.push_back(Term::list(e.forbidden));
      args.push_back(Term::list({to_term(e.items[0]), to_term(e.items[1])}));
      break;
    case EventExpr::Op::any:
      args.push_back(Term::integer(e.count));
      args.push_back(to_term(e.items[0]));
      break;
    case EventExpr::Op::aperiodic:
      args.push_back(to_term(e.items[0]));
      args.push_back(Term::list({to_term(e.items[1]), to_term(e.items[2])}));
      break;
    case EventExpr::Op::periodic:
      args.push_back(timespan_term(e.span));
      args.push_back(Term::list({to_term(e.items[0]), to_term(e.items[1])}));
      break;
    default:
      for (const auto& i : e.items) args.push_back(to_term(i));
      break;
  }
  return Term::compound(op_name(e.op), std::move(args));
}

namespace {

void collect_atoms(const EventExpr& e, std::vector<Term>& out) {
  if (e.op == EventExpr::Op::atom) {
    if (std::find(out.begin(), out.end(), e.atom) == out.end()) out.push_back(e.atom);
    return;
  }
  for (const auto& f : e.forbidden) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  for (const auto& i : e.items) collect_atoms(i, out);
}

}  // namespace

std::vector<Term> event_atoms(const EventExpr& e) {
  std::vector<Term> out;
  collect_atoms(e, out);
  return out;
}

std::vector<EventExpr> flatten_sequence(const std::vector<EventExpr>& items) {
  std::vector<EventExpr> out;
  for (const auto& i : items) {
    if (i.op == EventExpr::Op::sequence) {
      auto inner = flatten_sequence(i.items);
      out.insert(out.end(), inner.begin(), inner.end());
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<Term> terminator_set(const std::vector<EventExpr>& seq_items, std::size_t position, bool strict) {
  std::vector<Term> out;
  if (strict) {
    for (const auto& i : seq_items) collect_atoms(i, out);
    return out;
  }
  std::vector<Term> pair;
  collect_atoms(seq_items.at(position), pair);
  collect_atoms(seq_items.at(position + 1), pair);
  std::vector<Term> others;
  for (std::size_t k = 0; k < seq_items.size(); ++k) {
    if (k != position && k != position + 1) collect_atoms(seq_items[k], others);
  }
  for (const auto& t : others) {
    if (std::find(pair.begin(), pair.end(), t) == pair.end()) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool same_contributor(const Occurrence& a, const Occurrence& b) {
  if (a.seq != 0 || b.seq != 0) return a.seq == b.seq;
  return a.interval == b.interval && a.event == b.event;
}

// Two detections built from the very same single occurrence.
bool same_single(const Detection& a, const Detection& b) {
  return a.contributors.size() == 1 && b.contributors.size() == 1 &&
         same_contributor(a.contributors[0], b.contributors[0]);
}

Detection hull_of(const std::vector<const Detection*>& parts) {
  Detection d;
  const Detection* lo = parts.front();
  const Detection* hi = parts.front();
  for (const auto* p : parts) {
    if (p->interval.start() < lo->interval.start()) lo = p;
    if (p->interval.end() > hi->interval.end()) hi = p;
    d.contributors.insert(d.contributors.end(), p->contributors.begin(), p->contributors.end());
  }
  d.interval = TimeInterval{lo->interval.start(), hi->interval.end()};
  d.start_term = lo->start_term;
  d.end_term = hi->end_term;
  return d;
}

std::vector<Term> applied(const std::vector<Term>& ts, const Substitution& s) {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(apply(s, t));
  return out;
}

class Evaluator {
 public:
  Evaluator(Solver& sv, bool strict) : sv_(sv), strict_(strict) {}

  bool run(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    switch (e.op) {
      case EventExpr::Op::atom: return atom(e, s, fn);
      case EventExpr::Op::sequence: return sequence(e, s, fn);
      case EventExpr::Op::or_: return disjunction(e, s, fn);
      case EventExpr::Op::xor_: return exclusive(e, s, fn);
      case EventExpr::Op::and_: return conjunction(e, s, fn, false);
      case EventExpr::Op::concurrent: return conjunction(e, s, fn, true);
      case EventExpr::Op::neg: return negation(e, s, fn);
      case EventExpr::Op::any: return quantified(e, s, fn);
      case EventExpr::Op::aperiodic: return aperiodic(e, s, fn);
      case EventExpr::Op::periodic: return periodic(e, s, fn);
    }
    return true;
  }

 private:
  bool atom(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    return for_each_occurrence(sv_, e.atom, s, OccurrenceScope::both, [&](const Occurrence& o, const Substitution& s1) {
      Detection d;
      d.event = o.event;
      d.interval = o.interval;
      d.start_term = o.start_term;
      d.end_term = o.end_term;
      d.contributors.push_back(o);
      return fn(d, s1);
    });
  }

  // Unbroken pairs of instances of `a` and a later instance of `b`.
  bool pairs(const EventExpr& a, const EventExpr& b, const std::vector<Term>& local, const Substitution& s,
             const std::function<bool(const Detection&, const Detection&, const Substitution&)>& fn) {
    return run(a, s, [&](const Detection& da, const Substitution& s1) {
      return run(b, s1, [&](const Detection& db, const Substitution& s2) {
        if (same_single(da, db) || !interval_leq(da.interval, db.interval)) return true;
        if (ec_broken(sv_, da.interval.end(), apply(s2, to_term(a)), apply(s2, to_term(b)), db.interval.start(),
                      applied(local, s2))) {
          return true;
        }
        return fn(da, db, s2);
      });
    });
  }

  bool sequence(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    std::vector<EventExpr> items = flatten_sequence(e.items);
    if (items.size() == 1) return run(items[0], s, fn);
    std::vector<std::vector<Term>> terms;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) terms.push_back(terminator_set(items, i, strict_));
    std::vector<const Detection*> chain;
    Term expr = to_term(e);
    std::function<bool(std::size_t, const Substitution&)> step = [&](std::size_t i, const Substitution& si) -> bool {
      if (i == items.size()) {
        Detection d = hull_of(chain);
        d.interval = TimeInterval{chain.front()->interval.start(), chain.back()->interval.end()};
        d.start_term = chain.front()->start_term;
        d.end_term = chain.back()->end_term;
        d.event = apply(si, expr);
        return fn(d, si);
      }
      return run(items[i], si, [&](const Detection& d, const Substitution& s1) {
        if (i > 0) {
          const Detection& prev = *chain.back();
          if (same_single(prev, d) || !interval_leq(prev.interval, d.interval)) return true;
          if (ec_broken(sv_, prev.interval.end(), apply(s1, to_term(items[i - 1])), apply(s1, to_term(items[i])),
                        d.interval.start(), applied(terms[i - 1], s1))) {
            return true;
          }
        }
        chain.push_back(&d);
        bool go_on = step(i + 1, s1);
        chain.pop_back();
        return go_on;
      });
    };
    return step(0, s);
  }

  bool disjunction(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    Term expr = to_term(e);
    for (const auto& item : e.items) {
      bool go_on = run(item, s, [&](const Detection& d, const Substitution& s1) {
        Detection out = d;
        out.event = apply(s1, expr);
        return fn(out, s1);
      });
      if (!go_on) return false;
    }
    return true;
  }

  bool exists(const EventExpr& e, const Substitution& s) {
    bool found = false;
    run(e, s, [&](const Detection&, const Substitution&) {
      found = true;
      return false;
    });
    return found;
  }

  bool exclusive(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    Term expr = to_term(e);
    for (std::size_t i = 0; i < e.items.size(); ++i) {
      bool others = false;
      for (std::size_t j = 0; j < e.items.size() && !others; ++j) {
        if (j != i) others = exists(e.items[j], s);
      }
      if (others) continue;
      bool go_on = run(e.items[i], s, [&](const Detection& d, const Substitution& s1) {
        Detection out = d;
        out.event = apply(s1, expr);
        return fn(out, s1);
      });
      if (!go_on) return false;
    }
    return true;
  }

  bool conjunction(const EventExpr& e, const Substitution& s, const DetectionFn& fn, bool simultaneous) {
    Term expr = to_term(e);
    std::vector<const Detection*> parts;
    std::function<bool(std::size_t, const Substitution&)> step = [&](std::size_t i, const Substitution& si) -> bool {
      if (i == e.items.size()) {
        Detection d = hull_of(parts);
        d.event = apply(si, expr);
        return fn(d, si);
      }
      return run(e.items[i], si, [&](const Detection& d, const Substitution& s1) {
        if (simultaneous && !parts.empty() && !(d.interval == parts.front()->interval)) return true;
        parts.push_back(&d);
        bool go_on = step(i + 1, s1);
        parts.pop_back();
        return go_on;
      });
    };
    return step(0, s);
  }

  bool negation(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    Term expr = to_term(e);
    return pairs(e.items[0], e.items[1], e.forbidden, s,
                 [&](const Detection& da, const Detection& dc, const Substitution& s1) {
                   Detection d = hull_of({&da, &dc});
                   d.interval = TimeInterval{da.interval.start(), dc.interval.end()};
                   d.start_term = da.start_term;
                   d.end_term = dc.end_term;
                   d.event = apply(s1, expr);
                   return fn(d, s1);
                 });
  }

  bool quantified(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    Term expr = to_term(e);
    Term item = to_term(e.items[0]);
    struct Inst {
      Detection d;
      Substitution s;
      Term key;
    };
    std::vector<Inst> insts;
    run(e.items[0], s, [&](const Detection& d, const Substitution& s1) {
      insts.push_back({d, s1, apply(s1, item)});
      return true;
    });
    std::stable_sort(insts.begin(), insts.end(), [](const Inst& a, const Inst& b) {
      if (a.d.interval.start() != b.d.interval.start()) return a.d.interval.start() < b.d.interval.start();
      return a.d.interval.end() < b.d.interval.end();
    });
    // Instances with different bindings form separate histories.
    std::vector<Term> keys;
    for (const auto& in : insts) {
      if (std::find(keys.begin(), keys.end(), in.key) == keys.end()) keys.push_back(in.key);
    }
    for (const auto& key : keys) {
      std::vector<const Inst*> group;
      for (const auto& in : insts) {
        if (in.key == key) group.push_back(&in);
      }
      auto n = static_cast<std::size_t>(e.count);
      for (std::size_t k = 0; k + n <= group.size(); k += n) {
        std::vector<const Detection*> parts;
        for (std::size_t x = k; x < k + n; ++x) parts.push_back(&group[x]->d);
        Detection d = hull_of(parts);
        const Substitution& s1 = group[k + n - 1]->s;
        d.event = apply(s1, expr);
        if (!fn(d, s1)) return false;
      }
    }
    return true;
  }

  std::vector<Term> window_terminators(const EventExpr& open, const EventExpr& close) {
    std::vector<Term> out;
    collect_atoms(open, out);
    collect_atoms(close, out);
    return out;
  }

  bool aperiodic(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    Term expr = to_term(e);
    return pairs(e.items[1], e.items[2], window_terminators(e.items[1], e.items[2]), s,
                 [&](const Detection& da, const Detection& dc, const Substitution& s1) {
                   TimeInterval window{da.interval.start(), dc.interval.end()};
                   return run(e.items[0], s1, [&](const Detection& d, const Substitution& s2) {
                     if (!between(d.interval, window, Containment::strict)) return true;
                     Detection out = d;
                     out.event = apply(s2, expr);
                     return fn(out, s2);
                   });
                 });
  }

  bool periodic(const EventExpr& e, const Substitution& s, const DetectionFn& fn) {
    Term expr = to_term(e);
    const std::int64_t step = e.span.total_millis();
    auto emit_ticks = [&](const Detection& open, TimePoint limit, bool inclusive, const Substitution& s1) {
      for (std::int64_t t = open.interval.end().millis + step; inclusive ? t <= limit.millis : t < limit.millis;
           t += step) {
        sv_.tick();
        Detection d;
        d.interval = TimeInterval::at(TimePoint{t});
        d.start_term = d.end_term = time_term_like(open.end_term, TimePoint{t});
        d.contributors = open.contributors;
        d.event = apply(s1, expr);
        if (!fn(d, s1)) return false;
      }
      return true;
    };
    // Closed windows.
    bool go_on = pairs(e.items[0], e.items[1], window_terminators(e.items[0], e.items[1]), s,
                       [&](const Detection& da, const Detection& dc, const Substitution& s1) {
                         return emit_ticks(da, dc.interval.start(), false, s1);
                       });
    if (!go_on) return false;
    // The open window: the latest opening with no closing at or after it, up to the query clock.
    if (!sv_.options().now) return true;
    std::optional<Detection> latest;
    Substitution latest_s;
    run(e.items[0], s, [&](const Detection& d, const Substitution& s1) {
      if (!latest || d.interval.end() > latest->interval.end()) {
        latest = d;
        latest_s = s1;
      }
      return true;
    });
    if (!latest) return true;
    bool closed = false;
    run(e.items[1], latest_s, [&](const Detection& d, const Substitution&) {
      closed = d.interval.start() >= latest->interval.end() && !same_single(*latest, d);
      return !closed;
    });
    if (closed) return true;
    return emit_ticks(*latest, *sv_.options().now, true, latest_s);
  }

  Solver& sv_;
  bool strict_;
};

}  // namespace

bool detect_each(Solver& sv, const EventExpr& e, bool strict, const Substitution& s, const DetectionFn& fn) {
  Evaluator ev(sv, strict);
  return ev.run(e, s, fn);
}

std::vector<Detection> detect(KnowledgeBase& kb, const EventExpr& e, bool strict, const QueryOptions& options) {
  StatePtr view = options.txn ? kb.transaction_state(*options.txn) : kb.snapshot();
  Solver sv(kb, view, options);
  std::vector<Detection> out;
  detect_each(sv, e, strict, Substitution{}, [&](const Detection& d, const Substitution&) {
    out.push_back(d);
    return true;
  });
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.interval.end() != b.interval.end()) return a.interval.end() < b.interval.end();
    return a.interval.start() < b.interval.start();
  });
  return out;
}

Receipt record_detection(KnowledgeBase& kb, const Term& event, const Detection& d, const std::string& eis_key,
                         std::optional<TxnId> txn) {
  Term time = d.interval.atomic() ? d.start_term : Term::list({d.start_term, d.end_term});
  Clause c{Term::compound("occurs", {event, time}), {}};
  return kb.add_update(eis_key, {c}, false, txn);
}

void PeriodicScheduler::add(const Term& event, const Timespan& span, const Term& open, const Term& close) {
  if (span.total_millis() <= 0) throw std::invalid_argument("periodic span must be positive");
  EventExpr e;
  e.op = EventExpr::Op::periodic;
  e.span = span;
  e.items = {parse_event_expr(open), parse_event_expr(close)};
  std::lock_guard lock(mu_);
  entries_.push_back({event, std::move(e), {}});
}

std::vector<Detection> PeriodicScheduler::poll(TimePoint now) {
  std::lock_guard lock(mu_);
  std::vector<Detection> fired;
  QueryOptions o;
  o.now = now;
  for (auto& entry : entries_) {
    for (const auto& d : detect(kb_, entry.expr, true, o)) {
      if (d.interval.end() > now || entry.emitted.contains(d.interval.start().millis)) continue;
      entry.emitted.insert(d.interval.start().millis);
      std::string key = update_key(Term::compound("eis", {entry.event}));
      record_detection(kb_, entry.event, d, key);
      fired.push_back(d);
    }
  }
  return fired;
}

// ---------------------------------------------------------------------------

void install_algebra_builtins(BuiltinTable& t) {
  // event(Expr, [T1,T2]): occurrence intervals of a (complex) event.
  t.add("event", 2, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Solver::Cont& k) {
    EventExpr e = parse_event_expr(a[0]);
    return detect_each(sv, e, sv.options().strict, s, [&](const Detection& d, const Substitution& s1) {
      auto u = unify(a[1], Term::list({d.start_term, d.end_term}), s1);
      return u ? k(*u) : true;
    });
  }, true);
}

}  // namespace reactlog
