#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reactlog/solver.hpp"
#include "reactlog/syntax.hpp"

namespace reactlog {

namespace {

using Cont = Solver::Cont;

bool unify_k(const Term& a, const Term& b, const Substitution& s, const Cont& k) {
  auto u = unify(a, b, s);
  return u ? k(*u) : true;
}

bool is_arith_functor(const Term& t) {
  if (!t.is_compound()) return false;
  const std::string& n = t.name();
  if (t.arity() == 2) return n == "+" || n == "-" || n == "*" || n == "/" || n == "mod";
  if (t.arity() == 1) return n == "-";
  return false;
}

bool is_datetime_value(const Term& t) {
  return t.is_literal() && std::holds_alternative<TimePoint>(t.value());
}

// Numeric view of an evaluated operand: datetimes as millis.
std::optional<double> num(const Term& t) {
  if (is_datetime_value(t)) return static_cast<double>(std::get<TimePoint>(t.value()).millis);
  return as_number(t);
}

bool both_int(const Term& a, const Term& b) {
  return a.is_literal() && b.is_literal() && std::holds_alternative<std::int64_t>(a.value()) &&
         std::holds_alternative<std::int64_t>(b.value());
}

// Ordering used by the comparison builtins: plain values, datetime compounds
// and evaluable expressions.
std::optional<std::partial_ordering> order(const Term& a, const Term& b) {
  auto ea = eval_arith(a);
  auto eb = eval_arith(b);
  if (!ea || !eb) return compare_values(a, b);
  if (is_datetime_value(*ea) != is_datetime_value(*eb)) {
    // A datetime against plain millis compares on the time line.
    auto na = num(*ea);
    auto nb = num(*eb);
    if (na && nb) return *na <=> *nb;
  }
  return compare_values(*ea, *eb);
}

std::optional<TimeInterval> interval_of(const Term& t) {
  if (t.is_list() && t.arity() == 2) {
    auto a = as_time_point(t.arg(0));
    auto b = as_time_point(t.arg(1));
    if (a && b && *a <= *b) return TimeInterval{*a, *b};
    return std::nullopt;
  }
  return std::nullopt;
}

// less/more/lessequ/moreequ over values or, for two-element lists, intervals.
bool temporal_compare(const Term& a, const Term& b, const std::string& op) {
  auto ia = interval_of(a);
  auto ib = interval_of(b);
  if (ia && ib) {
    if (op == "lessequ") return interval_leq(*ia, *ib);
    if (op == "moreequ") return interval_leq(*ib, *ia);
    if (op == "less") return ia->end() < ib->start();
    return ib->end() < ia->start();
  }
  auto o = order(a, b);
  if (!o || *o == std::partial_ordering::unordered) return false;
  if (op == "less") return *o < 0;
  if (op == "more") return *o > 0;
  if (op == "lessequ") return *o <= 0;
  return *o >= 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Content of an update: clause text (with placeholders), a list of clause terms, or one clause term.
std::vector<Clause> update_clauses(const Term& content, const std::vector<Term>& args) {
  if (content.is_literal() && std::holds_alternative<std::string>(content.value())) {
    return parse_clause_text(std::get<std::string>(content.value()), args);
  }
  std::vector<Clause> out;
  if (content.is_list()) {
    for (const auto& c : content.args()) out.push_back(clause_from_term(fill_placeholders(c, args)));
    return out;
  }
  out.push_back(clause_from_term(fill_placeholders(content, args)));
  return out;
}

std::vector<Term> list_items(const Term& t) {
  if (!t.is_list()) throw std::invalid_argument("expected a list, got " + write_term(t));
  return {t.args().begin(), t.args().end()};
}

void install_arith(BuiltinTable& t) {
  t.add("is", 2, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    auto v = eval_arith(a[1]);
    if (!v) throw std::invalid_argument("is/2: cannot evaluate " + write_term(a[1]));
    return unify_k(a[0], *v, s, k);
  });
  struct Cmp {
    const char* name;
    bool (*test)(std::partial_ordering);
  };
  static const Cmp cmps[] = {
      {"<", [](std::partial_ordering o) { return o < 0; }},
      {">", [](std::partial_ordering o) { return o > 0; }},
      {"=<", [](std::partial_ordering o) { return o <= 0; }},
      {">=", [](std::partial_ordering o) { return o >= 0; }},
      {"=:=", [](std::partial_ordering o) { return o == 0; }},
      {"=\\=", [](std::partial_ordering o) { return o != 0 && o != std::partial_ordering::unordered; }},
  };
  for (const auto& c : cmps) {
    auto test = c.test;
    t.add(c.name, 2, [test](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
      auto o = order(a[0], a[1]);
      if (!o || *o == std::partial_ordering::unordered) return true;
      return test(*o) ? k(s) : true;
    });
  }
  for (const char* op : {"less", "more", "lessequ", "moreequ"}) {
    std::string name = op;
    t.add(name, 2, [name](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
      return temporal_compare(a[0], a[1], name) ? k(s) : true;
    });
  }
  for (const char* op : {"min", "max"}) {
    bool want_min = std::string(op) == "min";
    t.add(op, 2, [want_min](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
      auto items = list_items(a[0]);
      if (items.empty()) return true;
      Term best = items[0];
      for (const auto& x : items) {
        auto o = order(x, best);
        if (!o) throw std::invalid_argument("min/max: incomparable values");
        if (want_min ? *o < 0 : *o > 0) best = x;
      }
      return unify_k(a[1], best, s, k);
    });
  }
}

}  // namespace

std::optional<Term> eval_arith(const Term& e) {
  if (e.is_literal()) return e;
  if (e.is_compound() && e.has_functor("datetime", 6)) {
    auto tp = as_time_point(e);
    if (!tp) return std::nullopt;
    return Term::datetime(*tp);
  }
  if (e.is_compound() && e.has_functor("timespan", 4)) {
    auto ts = as_timespan(e);
    if (!ts) return std::nullopt;
    return Term::integer(ts->total_millis());
  }
  if (!is_arith_functor(e)) return std::nullopt;
  if (e.arity() == 1) {
    auto v = eval_arith(e.arg(0));
    if (!v) return std::nullopt;
    if (auto i = as_integer(*v)) return Term::integer(-*i);
    if (auto d = as_number(*v)) return Term::real(-*d);
    return std::nullopt;
  }
  auto a = eval_arith(e.arg(0));
  auto b = eval_arith(e.arg(1));
  if (!a || !b) return std::nullopt;
  const std::string& op = e.name();
  bool da = is_datetime_value(*a);
  bool db = is_datetime_value(*b);
  if (da || db) {
    auto na = num(*a);
    auto nb = num(*b);
    if (!na || !nb) return std::nullopt;
    auto ia = static_cast<std::int64_t>(*na);
    auto ib = static_cast<std::int64_t>(*nb);
    if (op == "+" && da != db) return Term::datetime(TimePoint{ia + ib});
    if (op == "-" && da && db) return Term::integer(ia - ib);
    if (op == "-" && da) return Term::datetime(TimePoint{ia - ib});
    return std::nullopt;
  }
  if (both_int(*a, *b)) {
    std::int64_t x = std::get<std::int64_t>(a->value());
    std::int64_t y = std::get<std::int64_t>(b->value());
    if (op == "+") return Term::integer(x + y);
    if (op == "-") return Term::integer(x - y);
    if (op == "*") return Term::integer(x * y);
    if (op == "mod") {
      if (y == 0) return std::nullopt;
      std::int64_t m = x % y;
      if (m != 0 && ((m < 0) != (y < 0))) m += y;
      return Term::integer(m);
    }
    if (y == 0) return std::nullopt;
    if (x % y == 0) return Term::integer(x / y);
    return Term::real(static_cast<double>(x) / static_cast<double>(y));
  }
  auto x = as_number(*a);
  auto y = as_number(*b);
  if (!x || !y) return std::nullopt;
  if (op == "+") return Term::real(*x + *y);
  if (op == "-") return Term::real(*x - *y);
  if (op == "*") return Term::real(*x * *y);
  if (op == "/") return *y == 0 ? std::nullopt : std::optional<Term>(Term::real(*x / *y));
  if (op == "mod") return *y == 0 ? std::nullopt : std::optional<Term>(Term::real(std::fmod(*x, *y)));
  return std::nullopt;
}

void install_core_builtins(BuiltinTable& t) {
  t.add("true", 0, [](Solver&, std::span<const Term>, const Substitution& s, const Cont& k) { return k(s); });
  t.add("!", 0, [](Solver&, std::span<const Term>, const Substitution& s, const Cont& k) { return k(s); });
  t.add("fail", 0, [](Solver&, std::span<const Term>, const Substitution&, const Cont&) { return true; });
  t.add("false", 0, [](Solver&, std::span<const Term>, const Substitution&, const Cont&) { return true; });

  // X = Expr unifies; an evaluable arithmetic right side is evaluated first,
  // and a dotted host call binds its result to X.
  t.add("=", 2, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    const Term& rhs = a[1];
    if (rhs.is_compound() && rhs.name().find('.') != std::string::npos && rhs.name().front() != '.') {
      std::vector<Term> args(rhs.args().begin(), rhs.args().end());
      args.push_back(a[0]);
      return sv.solve(Term::compound(rhs.name(), args), s, k);
    }
    if (is_arith_functor(rhs) && rhs.is_ground()) {
      if (auto v = eval_arith(rhs)) return unify_k(a[0], *v, s, k);
    }
    return unify_k(a[0], rhs, s, k);
  });
  t.add("\\=", 2, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return unify(a[0], a[1]) ? true : k(s);
  });
  t.add("==", 2, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return compare_terms(a[0], a[1]) == 0 ? k(s) : true;
  });
  t.add("\\==", 2, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return compare_terms(a[0], a[1]) != 0 ? k(s) : true;
  });
  install_arith(t);

  t.add("ground", 1, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return a[0].is_ground() ? k(s) : true;
  });
  t.add("var", 1, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return a[0].is_variable() ? k(s) : true;
  });
  t.add("nonvar", 1, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return a[0].is_variable() ? true : k(s);
  });
  t.add("call", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return sv.solve(a[0], s, k);
  });
  t.add("member", 2, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    if (!a[1].is_list()) return true;
    for (const auto& x : a[1].args()) {
      if (!unify_k(a[0], x, s, k)) return false;
    }
    return true;
  });
  t.add("length", 2, [](Solver&, std::span<const Term> a, const Substitution& s, const Cont& k) {
    if (!a[0].is_list()) return true;
    return unify_k(a[1], Term::integer(static_cast<std::int64_t>(a[0].arity())), s, k);
  });
  t.add("findall", 3, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    std::vector<Term> items;
    sv.solve(a[1], s, [&](const Substitution& s1) {
      items.push_back(apply(s1, a[0]));
      return true;
    });
    return unify_k(a[2], Term::list(std::move(items)), s, k);
  });

  auto systime = [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    TimePoint now = sv.now();
    if (a[0].has_functor("datetime", 6)) {
      CivilTime c = to_civil(now);
      Term dt = Term::compound("datetime", {Term::integer(c.year), Term::integer(c.month), Term::integer(c.day),
                                            Term::integer(c.hour), Term::integer(c.minute), Term::integer(c.second)});
      return unify_k(a[0], dt, s, k);
    }
    return unify_k(a[0], sv.time_term(now), s, k);
  };
  t.add("sysTime", 1, systime);
  t.add("systime", 1, systime);

  // interval(Span, T): periodic time function, true when the schedule is due at T.
  t.add("interval", 2, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    auto span = as_timespan(a[0]);
    if (!span || span->total_millis() <= 0) throw std::invalid_argument("interval/2: bad timespan " + write_term(a[0]));
    Substitution s1 = s;
    TimePoint at;
    if (a[1].is_variable()) {
      at = sv.now();
      auto u = unify(a[1], sv.time_term(at), s);
      if (!u) return true;
      s1 = *u;
    } else {
      auto tp = as_time_point(a[1]);
      if (!tp) return true;
      at = *tp;
    }
    const auto& o = sv.options();
    bool due = false;
    if (o.schedule != nullptr) {
      due = o.schedule->due(o.schedule_scope + "|" + write_term(a[0]), span->total_millis(), at);
    } else {
      due = at.millis % span->total_millis() == 0;
    }
    return due ? k(s1) : true;
  });
}

void install_update_builtins(BuiltinTable& t) {
  auto add_impl = [](Solver& sv, const std::string& id, const Term& content, const std::vector<Term>& args,
                     const Substitution& s, const Cont& k) {
    Receipt r = sv.write_add(id, update_clauses(content, args), false);
    return r.ok() ? k(s) : true;
  };
  t.add("add", 3, [add_impl](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return add_impl(sv, update_key(a[0]), a[1], list_items(a[2]), s, k);
  });
  t.add("add", 2, [add_impl](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    return add_impl(sv, update_key(a[0]), a[1], {}, s, k);
  });
  // add(Path): loads a clause-text file under its path as id.
  // add([Clause, ...]): asserts clause terms under their canonical text as id.
  t.add("add", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    if (a[0].is_list()) {
      Receipt r = sv.write_add(write_term(a[0]), update_clauses(a[0], {}), false);
      return r.ok() ? k(s) : true;
    }
    std::string path = symbol_text(a[0]);
    Receipt r = sv.write_add(path, parse_clause_text(read_file(path)), false);
    return r.ok() ? k(s) : true;
  });
  t.add("remove", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    Receipt r = sv.write_remove(update_key(a[0]), false);
    return r.ok() || r.status == UpdateStatus::not_found ? k(s) : true;
  });
  // retract(C): removes the first stored clause matching C, binding its variables.
  t.add("retract", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    Clause pattern = clause_from_term(a[0]);
    for (const auto& sc : sv.view().clauses(PredKey::of(pattern.head))) {
      auto u = unify(pattern.to_term(), rename_apart(sc->clause.to_term(), sv.fresh_suffix()), s);
      if (!u) continue;
      Receipt r = sv.write_remove_clauses({sc->seq}, false);
      return r.ok() ? k(*u) : true;
    }
    return true;
  });
  t.add("retractall", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    std::set<std::uint64_t> seqs;
    const Term& head = a[0];
    for (const auto& sc : sv.view().clauses(PredKey::of(head))) {
      if (unify(head, rename_apart(sc->clause.head, "#x"))) seqs.insert(sc->seq);
    }
    if (seqs.empty()) return k(s);
    Receipt r = sv.write_remove_clauses(seqs, false);
    return r.ok() ? k(s) : true;
  });
  t.add("consume", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    Receipt r = sv.write_consume(update_key(a[0]), ConsumptionPolicy::all);
    return r.ok() ? k(s) : true;
  });
  t.add("consume", 2, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    Receipt r = sv.write_consume(update_key(a[0]), policy_from_string(symbol_text(a[1])));
    return r.ok() ? k(s) : true;
  });
  // transaction(G): G's writes commit together, or not at all when G fails or
  // the final state violates an integrity constraint.
  auto txn = [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    if (sv.options().txn || sv.options().hypothetical) return sv.solve(a[0], s, k);
    StatePtr before = sv.view_ptr();
    TxnId id = sv.kb().begin_transaction();
    sv.set_transaction(id);
    std::optional<Substitution> answer;
    try {
      answer = sv.first(a[0], s);
    } catch (...) {
      sv.set_transaction(std::nullopt);
      sv.kb().rollback(id);
      sv.reset_view(before);
      throw;
    }
    sv.set_transaction(std::nullopt);
    if (!answer) {
      sv.kb().rollback(id);
      sv.reset_view(before);
      return true;
    }
    Receipt r = sv.kb().commit(id);
    if (!r.ok()) {
      sv.reset_view(before);
      return true;
    }
    return k(*answer);
  };
  t.add("transaction", 2, txn);
  t.add("testIntegrity", 0, [](Solver& sv, std::span<const Term>, const Substitution& s, const Cont& k) {
    QueryOptions o = sv.options();
    return sv.kb().check_integrity(sv.view_ptr(), o).ok() ? k(s) : true;
  });
  t.add("testIntegrity", 1, [](Solver& sv, std::span<const Term> a, const Substitution& s, const Cont& k) {
    Clause c = clause_from_term(a[0]);
    auto sc = std::make_shared<StoredClause>();
    sc->clause = c;
    sc->update_id = "#hypothetical";
    StatePtr hypo = sv.view_ptr()->with_added({sc});
    return sv.kb().check_integrity(hypo, sv.options(), c.head).ok() ? k(s) : true;
  });
}

}  // namespace reactlog
