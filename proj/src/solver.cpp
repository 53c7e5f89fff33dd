#include "reactlog/solver.hpp"

#include <chrono>

#include "reactlog/syntax.hpp"

namespace reactlog {

Solver::Solver(KnowledgeBase& kb, StatePtr view, QueryOptions options)
    : kb_(kb), view_(std::move(view)), options_(std::move(options)) {}

TimePoint Solver::now() const {
  if (options_.now) return *options_.now;
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch());
  return TimePoint{ms.count()};
}

Term Solver::time_term(TimePoint t) const { return options_.numeric_time ? Term::integer(t.millis) : Term::datetime(t); }

void Solver::tick() {
  if (++steps_ > options_.step_budget) {
    throw BudgetExceeded("step budget of " + std::to_string(options_.step_budget) + " exhausted");
  }
  if (options_.deadline && (steps_ & 127U) == 0 && std::chrono::steady_clock::now() > *options_.deadline) {
    throw QueryTimeout("query deadline passed after " + std::to_string(steps_) + " steps");
  }
}

namespace {
// Shared by all solvers so substitutions can move between them.
std::atomic<std::uint64_t> rename_counter{0};
}  // namespace

std::string Solver::fresh_suffix() { return "#" + std::to_string(++rename_counter); }

bool Solver::enter(const Term& goal) {
  for (const auto& a : ancestors_) {
    if (is_variant(a, goal)) return false;
  }
  ancestors_.push_back(goal);
  return true;
}

void Solver::leave() { ancestors_.pop_back(); }

std::optional<Substitution> Solver::first(const Term& goal, const Substitution& s) {
  std::optional<Substitution> out;
  solve(goal, s, [&](const Substitution& a) {
    out = a;
    return false;
  });
  return out;
}

bool Solver::solve_all(std::span<const Term> goals, const Substitution& s, const Cont& k) {
  if (goals.empty()) return k(s);
  if (goals.size() == 1) return solve(goals[0], s, k);
  return solve(goals[0], s, [&](const Substitution& s1) { return solve_all(goals.subspan(1), s1, k); });
}

namespace {

bool is_dotted(const std::string& name) {
  return name.find('.') != std::string::npos && name.front() != '.' && name.back() != '.';
}

// Cheap pre-unification filter on the top-level arguments.
bool quick_mismatch(const Term& head, const Term& goal) {
  auto args_h = head.args();
  auto args_g = goal.args();
  for (std::size_t i = 0; i < args_h.size(); ++i) {
    const Term& a = args_h[i];
    const Term& b = args_g[i];
    if (a.is_variable() || b.is_variable()) continue;
    if (a.kind() != b.kind()) return true;
    if (a.is_constant()) {
      if (a.name() != b.name()) return true;
    } else if (a.is_literal()) {
      if (!(a.value() == b.value())) return true;
    } else if (a.is_compound()) {
      if (a.arity() != b.arity() || a.name() != b.name()) return true;
    } else if (a.arity() != b.arity()) {
      return true;
    }
  }
  return false;
}

}  // namespace

bool Solver::solve(const Term& goal0, const Substitution& s, const Cont& k) {
  tick();
  Term goal = s.walk(goal0);
  switch (goal.kind()) {
    case Term::Kind::variable:
      throw std::invalid_argument("unbound goal variable " + goal.name());
    case Term::Kind::literal:
    case Term::Kind::list:
      throw std::invalid_argument("goal is not callable: " + goal.to_string());
    default:
      break;
  }
  const std::string& name = goal.name();
  std::size_t arity = goal.arity();
  if (arity == 2 && name == ",") {
    return solve(goal.arg(0), s, [&](const Substitution& s1) { return solve(goal.arg(1), s1, k); });
  }
  if (arity == 1 && name == "not") {
    bool found = false;
    solve(goal.arg(0), s, [&](const Substitution&) {
      found = true;
      return false;
    });
    return found ? true : k(s);
  }
  if (const Builtin* b = standard_builtins().find(name, arity)) {
    std::vector<Term> args;
    args.reserve(arity);
    for (const auto& a : goal.args()) args.push_back(apply(s, a));
    if (!b->loop_checked) return b->fn(*this, args, s, k);
    // Wrapped so the builtin does not collide with clauses of the same name.
    Term resolved = Term::compound("$call", {Term::compound(name, args)});
    if (!enter(resolved)) return true;
    bool r = b->fn(*this, args, s, [&](const Substitution& s1) {
      leave();
      bool go_on = k(s1);
      ancestors_.push_back(resolved);
      return go_on;
    });
    leave();
    return r;
  }
  if (is_dotted(name)) {
    auto h = kb_.hosts().find(name, arity);
    if (!h) throw UnknownHostFunction("no host function registered for " + name + "/" + std::to_string(arity));
    std::vector<Term> args;
    for (const auto& a : goal.args()) args.push_back(apply(s, a));
    return call_host(*h, args, s, k);
  }
  if (view_->clauses(name, arity).empty()) {
    if (auto h = kb_.hosts().find(name, arity)) {
      std::vector<Term> args;
      for (const auto& a : goal.args()) args.push_back(apply(s, a));
      return call_host(*h, args, s, k);
    }
    return true;
  }
  return solve_clauses(goal, s, k);
}

bool Solver::solve_clauses(const Term& goal0, const Substitution& s, const Cont& k) {
  Term goal = apply(s, goal0);
  if (!goal.is_constant() && !goal.is_compound()) return true;
  StatePtr hold = view_;
  const ClauseList& list = hold->clauses(goal.name(), goal.arity());
  if (list.empty()) return true;
  if (!enter(goal)) return true;
  for (const auto& sc : list) {
    tick();
    const Clause& c = sc->clause;
    if (quick_mismatch(c.head, goal)) continue;
    std::string suffix = fresh_suffix();
    Term head = rename_apart(c.head, suffix);
    auto local = unify(head, goal);
    if (!local) continue;
    std::vector<Term> body;
    body.reserve(c.body.size());
    for (const auto& g : c.body) body.push_back(rename_apart(g, suffix));
    bool go_on = solve_all(body, *local, [&](const Substitution& l2) {
      Term inst = apply(l2, goal);
      auto s2 = unify(goal, inst, s);
      if (!s2) return true;
      leave();
      bool r = k(*s2);
      ancestors_.push_back(goal);
      return r;
    });
    if (!go_on) {
      leave();
      return false;
    }
  }
  leave();
  return true;
}

bool Solver::call_host(const HostFunction& h, std::span<const Term> args, const Substitution& s, const Cont& k) {
  if (h.side_effecting && options_.hypothetical) return k(s);
  auto res = h.fn(args);
  if (!res) return true;
  if (res->empty()) return k(s);
  if (res->size() != args.size()) {
    throw std::runtime_error("host function " + h.name + " returned " + std::to_string(res->size()) +
                             " values for " + std::to_string(args.size()) + " arguments");
  }
  Substitution s2 = s;
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto u = unify(args[i], (*res)[i], s2);
    if (!u) return true;
    s2 = std::move(*u);
  }
  return k(s2);
}

void Solver::mirror(const Receipt& r) {
  if (!r.removed.empty()) view_ = view_->with_removed(r.removed);
  if (!r.added.empty()) view_ = view_->with_added(r.added);
}

namespace {
// Sequence numbers for hypothetical clauses live in a separate range.
std::atomic<std::uint64_t> hypothetical_seq{std::uint64_t{1} << 62};
}  // namespace

Receipt Solver::write_add(const std::string& id, std::vector<Clause> clauses, bool transactional) {
  if (options_.hypothetical) {
    Receipt r;
    r.id = id;
    if (clauses.empty()) {
      r.status = UpdateStatus::noop;
      return r;
    }
    for (auto& c : clauses) {
      auto sc = std::make_shared<StoredClause>();
      sc->clause = std::move(c);
      sc->update_id = id;
      sc->seq = hypothetical_seq++;
      r.added.push_back(std::move(sc));
    }
    mirror(r);
    return r;
  }
  Receipt r = kb_.add_update(id, std::move(clauses), transactional, options_.txn);
  if (r.ok()) mirror(r);
  return r;
}

Receipt Solver::write_remove(const std::string& id, bool transactional) {
  if (options_.hypothetical) {
    Receipt r;
    r.id = id;
    for (const auto& c : view_->update_clauses(id)) r.removed.insert(c->seq);
    r.status = r.removed.empty() ? UpdateStatus::not_found : UpdateStatus::applied;
    mirror(r);
    return r;
  }
  Receipt r = kb_.remove_update(id, transactional, options_.txn);
  if (r.ok()) {
    mirror(r);
    // Clauses under the id that only this view holds go as well.
    if (view_->has_update(id)) view_ = view_->with_removed_update(id);
  }
  return r;
}

Receipt Solver::write_remove_clauses(const std::set<std::uint64_t>& seqs, bool transactional) {
  if (options_.hypothetical) {
    Receipt r;
    r.removed = seqs;
    mirror(r);
    return r;
  }
  Receipt r = kb_.remove_clauses(seqs, transactional, options_.txn);
  if (r.ok()) {
    mirror(r);
    view_ = view_->with_removed(seqs);
  }
  return r;
}

Receipt Solver::write_consume(const std::string& key, ConsumptionPolicy policy) {
  auto targets = consumption_targets(*view_, key, policy);
  if (options_.hypothetical) {
    Receipt r;
    r.id = key;
    r.removed = targets;
    r.status = targets.empty() ? UpdateStatus::noop : UpdateStatus::applied;
    mirror(r);
    return r;
  }
  // The view decides which occurrences go, so the store and the view agree.
  Receipt r = targets.empty() ? Receipt{UpdateStatus::noop, key, {}, {}, {}, {}}
                              : kb_.remove_clauses(targets, false, options_.txn);
  if (r.ok()) {
    r.id = key;
    view_ = view_->with_removed(targets);
  }
  return r;
}

// ---------------------------------------------------------------------------

void BuiltinTable::add(const std::string& name, std::size_t arity, BuiltinFn fn, bool loop_checked) {
  table_[PredKey{name, arity}] = Builtin{std::move(fn), loop_checked};
}

const Builtin* BuiltinTable::find(const std::string& name, std::size_t arity) const {
  auto it = table_.find(PredKey{name, arity});
  return it == table_.end() ? nullptr : &it->second;
}

const BuiltinTable& standard_builtins() {
  static const BuiltinTable table = [] {
    BuiltinTable t;
    install_core_builtins(t);
    install_update_builtins(t);
    install_event_calculus_builtins(t);
    install_algebra_builtins(t);
    return t;
  }();
  return table;
}

}  // namespace reactlog
