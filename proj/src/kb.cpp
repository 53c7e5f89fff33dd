#include "reactlog/kb.hpp"

#include <algorithm>
#include <functional>

#include "reactlog/solver.hpp"
#include "reactlog/syntax.hpp"

namespace reactlog {

// ---------------------------------------------------------------------------
// Clauses

Term Clause::to_term() const {
  if (body.empty()) return head;
  return Term::compound(":-", {head, make_conjunction(body)});
}

std::string Clause::to_string() const { return write_term(to_term()) + "."; }

Clause clause_from_term(const Term& t) {
  Clause c;
  if (t.has_functor(":-", 2)) {
    c.head = t.arg(0);
    c.body = conjuncts(t.arg(1));
  } else if (t.has_functor(":-", 1)) {
    throw std::invalid_argument("directive is not a clause: " + t.to_string());
  } else {
    c.head = t;
  }
  if (!c.head.is_constant() && !c.head.is_compound()) {
    throw std::invalid_argument("clause head must be an atom or compound: " + c.head.to_string());
  }
  for (const auto& g : c.body) {
    if (g.is_literal() || g.is_list()) throw std::invalid_argument("body goal is not callable: " + g.to_string());
  }
  return c;
}

std::vector<Clause> parse_clause_text(std::string_view text, const std::vector<Term>& args) {
  std::vector<Clause> out;
  for (const auto& t : parse_clauses(text)) {
    out.push_back(clause_from_term(args.empty() ? t : fill_placeholders(t, args)));
  }
  return out;
}

std::string update_key(const Term& id) {
  if (id.is_literal()) {
    if (const auto* s = std::get_if<std::string>(&id.value())) return *s;
  }
  if (id.is_constant()) return id.name();
  return write_term(id);
}

const char* to_string(UpdateStatus s) {
  switch (s) {
    case UpdateStatus::applied:
      return "applied";
    case UpdateStatus::noop:
      return "noop";
    case UpdateStatus::not_found:
      return "not_found";
    case UpdateStatus::violated:
      return "violated";
    case UpdateStatus::rejected:
      return "rejected";
  }
  return "?";
}

ConsumptionPolicy policy_from_string(std::string_view s) {
  if (s == "all") return ConsumptionPolicy::all;
  if (s == "first") return ConsumptionPolicy::first;
  if (s == "last") return ConsumptionPolicy::last;
  if (s == "none") return ConsumptionPolicy::none;
  throw std::invalid_argument("unknown consumption policy: " + std::string(s));
}

const char* to_string(ConsumptionPolicy p) {
  switch (p) {
    case ConsumptionPolicy::all:
      return "all";
    case ConsumptionPolicy::first:
      return "first";
    case ConsumptionPolicy::last:
      return "last";
    case ConsumptionPolicy::none:
      return "none";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// KbState

namespace {
const ClauseList& empty_list() {
  static const ClauseList l;
  return l;
}
}  // namespace

const ClauseList& KbState::clauses(const PredKey& key) const {
  auto it = preds_.find(key);
  return it == preds_.end() ? empty_list() : *it->second;
}

const ClauseList& KbState::update_clauses(const std::string& id) const {
  auto it = updates_.find(id);
  return it == updates_.end() ? empty_list() : *it->second;
}

std::vector<std::string> KbState::update_ids() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : updates_) out.push_back(k);
  return out;
}

std::vector<PredKey> KbState::predicates() const {
  std::vector<PredKey> out;
  for (const auto& [k, v] : preds_) out.push_back(k);
  return out;
}

std::shared_ptr<const KbState> KbState::with_added(const ClauseList& added) const {
  auto next = std::make_shared<KbState>(*this);
  std::map<PredKey, std::shared_ptr<ClauseList>> touched;
  std::map<std::string, std::shared_ptr<ClauseList>> touched_ids;
  for (const auto& c : added) {
    PredKey key = PredKey::of(c->clause.head);
    auto& list = touched[key];
    if (!list) {
      auto it = preds_.find(key);
      list = it == preds_.end() ? std::make_shared<ClauseList>() : std::make_shared<ClauseList>(*it->second);
    }
    list->push_back(c);
    auto& ids = touched_ids[c->update_id];
    if (!ids) {
      auto it = updates_.find(c->update_id);
      ids = it == updates_.end() ? std::make_shared<ClauseList>() : std::make_shared<ClauseList>(*it->second);
    }
    ids->push_back(c);
  }
  for (auto& [k, v] : touched) next->preds_[k] = std::move(v);
  for (auto& [k, v] : touched_ids) next->updates_[k] = std::move(v);
  next->size_ += added.size();
  return next;
}

std::shared_ptr<const KbState> KbState::with_removed(const std::set<std::uint64_t>& seqs) const {
  auto next = std::make_shared<KbState>(*this);
  std::set<PredKey> preds;
  std::set<std::string> ids;
  for (const auto& [id, list] : updates_) {
    for (const auto& c : *list) {
      if (seqs.contains(c->seq)) {
        preds.insert(PredKey::of(c->clause.head));
        ids.insert(id);
      }
    }
  }
  std::size_t removed = 0;
  for (const auto& key : preds) {
    auto list = std::make_shared<ClauseList>();
    for (const auto& c : *preds_.at(key)) {
      if (seqs.contains(c->seq)) {
        ++removed;
      } else {
        list->push_back(c);
      }
    }
    if (list->empty()) {
      next->preds_.erase(key);
    } else {
      next->preds_[key] = std::move(list);
    }
  }
  for (const auto& id : ids) {
    auto list = std::make_shared<ClauseList>();
    for (const auto& c : *updates_.at(id)) {
      if (!seqs.contains(c->seq)) list->push_back(c);
    }
    if (list->empty()) {
      next->updates_.erase(id);
    } else {
      next->updates_[id] = std::move(list);
    }
  }
  next->size_ -= removed;
  return next;
}

std::shared_ptr<const KbState> KbState::with_removed_update(const std::string& id) const {
  auto it = updates_.find(id);
  if (it == updates_.end()) return std::make_shared<KbState>(*this);
  std::set<std::uint64_t> seqs;
  for (const auto& c : *it->second) seqs.insert(c->seq);
  return with_removed(seqs);
}

// ---------------------------------------------------------------------------
// Stratification

namespace {

void body_edges(const Term& g, bool negative, const std::function<bool(const PredKey&)>& is_builtin,
                std::vector<std::pair<PredKey, bool>>& out) {
  if (g.is_variable() || g.is_literal() || g.is_list()) return;
  if (g.has_functor(",", 2)) {
    body_edges(g.arg(0), negative, is_builtin, out);
    body_edges(g.arg(1), negative, is_builtin, out);
    return;
  }
  if (g.has_functor("not", 1)) {
    body_edges(g.arg(0), true, is_builtin, out);
    return;
  }
  if (g.has_functor("findall", 3)) {
    body_edges(g.arg(1), true, is_builtin, out);
    return;
  }
  if (g.has_functor("transaction", 1)) {
    body_edges(g.arg(0), negative, is_builtin, out);
    return;
  }
  PredKey key = PredKey::of(g);
  if (is_builtin(key)) return;
  out.emplace_back(std::move(key), negative);
}

}  // namespace

std::optional<std::string> check_stratified(const KbState& state,
                                            const std::function<bool(const PredKey&)>& is_builtin) {
  std::map<PredKey, std::vector<std::pair<PredKey, bool>>> graph;
  for (const auto& key : state.predicates()) {
    auto& edges = graph[key];
    for (const auto& c : state.clauses(key)) {
      for (const auto& g : c->clause.body) body_edges(g, false, is_builtin, edges);
    }
  }
  // Tarjan's strongly connected components.
  std::map<PredKey, int> index, low;
  std::map<PredKey, int> comp;
  std::vector<PredKey> stack;
  std::set<PredKey> on_stack;
  int counter = 0;
  int comps = 0;
  std::function<void(const PredKey&)> visit = [&](const PredKey& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& [w, neg] : graph[v]) {
      if (!index.contains(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.contains(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        PredKey w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp[w] = comps;
        if (w == v) break;
      }
      ++comps;
    }
  };
  std::vector<PredKey> nodes;
  for (const auto& [k, v] : graph) nodes.push_back(k);
  for (const auto& k : nodes) {
    if (!index.contains(k)) visit(k);
  }
  for (const auto& [v, edges] : graph) {
    for (const auto& [w, neg] : edges) {
      if (neg && comp[v] == comp[w]) {
        return "cyclic negation: " + v.to_string() + " depends negatively on " + w.to_string();
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Host functions and schedules

void HostRegistry::add(HostFunction h) {
  std::lock_guard lock(mu_);
  auto key = std::make_pair(h.name, h.arity);
  if (fns_.contains(key)) throw std::invalid_argument("host function already registered: " + h.name + "/" + std::to_string(h.arity));
  fns_[key] = std::make_shared<const HostFunction>(std::move(h));
}

std::shared_ptr<const HostFunction> HostRegistry::find(const std::string& name, std::size_t arity) const {
  std::lock_guard lock(mu_);
  if (auto it = fns_.find({name, arity}); it != fns_.end()) return it->second;
  auto dot = name.rfind('.');
  if (dot != std::string::npos) {
    if (auto it = fns_.find({name.substr(dot + 1), arity}); it != fns_.end()) return it->second;
  }
  return nullptr;
}

bool ScheduleMemory::due(const std::string& key, std::int64_t span_ms, TimePoint now) {
  std::lock_guard lock(mu_);
  std::optional<TimePoint> last;
  if (auto it = last_.find(key); it != last_.end()) last = it->second;
  if (!periodic_due(Timespan::from_millis(span_ms), last, now)) return false;
  last_[key] = now;
  return true;
}

void ScheduleMemory::clear() {
  std::lock_guard lock(mu_);
  last_.clear();
}

// ---------------------------------------------------------------------------
// KnowledgeBase

struct KnowledgeBase::Op {
  enum class Kind { add, remove_id, remove_seqs, retract_all, consume } kind = Kind::add;
  std::string id;
  std::vector<Clause> clauses;
  std::set<std::uint64_t> seqs;
  Term pattern;
  ConsumptionPolicy policy = ConsumptionPolicy::all;
};

struct KnowledgeBase::Txn {
  StatePtr state;
  std::vector<Op> ops;
};

KnowledgeBase::KnowledgeBase() : state_(std::make_shared<KbState>()) {}
KnowledgeBase::~KnowledgeBase() = default;

StatePtr KnowledgeBase::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::optional<std::string> KnowledgeBase::stratification_error(const KbState& s) const {
  const auto& builtins = standard_builtins();
  return check_stratified(s, [&](const PredKey& k) { return builtins.contains(k); });
}

namespace {

std::optional<TimePoint> occurrence_start(const Clause& c) {
  if (!c.is_fact() || c.head.arity() != 2) return std::nullopt;
  if (!c.head.has_functor("occurs", 2)) return std::nullopt;
  const Term& t = c.head.arg(1);
  if (t.is_list() && t.arity() == 2) return as_time_point(t.arg(0));
  return as_time_point(t);
}

}  // namespace

std::set<std::uint64_t> consumption_targets(const KbState& state, const std::string& key, ConsumptionPolicy policy) {
  std::set<std::uint64_t> out;
  if (policy == ConsumptionPolicy::none || !state.has_update(key)) return out;
  if (policy == ConsumptionPolicy::all) {
    for (const auto& c : state.update_clauses(key)) {
      if (occurrence_start(c->clause)) out.insert(c->seq);
    }
    return out;
  }
  const StoredClause* pick = nullptr;
  TimePoint best;
  for (const auto& c : state.update_clauses(key)) {
    auto t = occurrence_start(c->clause);
    if (!t) continue;
    bool better = pick == nullptr || (policy == ConsumptionPolicy::first ? *t < best : *t >= best);
    if (better) {
      pick = c.get();
      best = *t;
    }
  }
  if (pick != nullptr) out.insert(pick->seq);
  return out;
}

Receipt KnowledgeBase::run_op(StatePtr& state, const Op& op) {
  Receipt r;
  r.id = op.id;
  switch (op.kind) {
    case Op::Kind::add: {
      if (op.clauses.empty()) {
        r.status = UpdateStatus::noop;
        return r;
      }
      ClauseList added;
      bool has_rules = false;
      for (const auto& c : op.clauses) {
        auto sc = std::make_shared<StoredClause>();
        sc->clause = c;
        sc->update_id = op.id;
        sc->seq = next_seq_++;
        has_rules = has_rules || !c.is_fact();
        added.push_back(std::move(sc));
      }
      auto next = state->with_added(added);
      if (has_rules) {
        if (auto err = stratification_error(*next)) {
          r.status = UpdateStatus::rejected;
          r.message = *err;
          return r;
        }
      }
      state = next;
      r.added = std::move(added);
      return r;
    }
    case Op::Kind::remove_id: {
      if (!state->has_update(op.id)) {
        r.status = UpdateStatus::not_found;
        r.message = "no update with id " + op.id;
        return r;
      }
      for (const auto& c : state->update_clauses(op.id)) r.removed.insert(c->seq);
      state = state->with_removed(r.removed);
      return r;
    }
    case Op::Kind::remove_seqs:
    case Op::Kind::retract_all: {
      std::set<std::uint64_t> seqs;
      if (op.kind == Op::Kind::remove_seqs) {
        for (const auto& key : state->predicates()) {
          for (const auto& c : state->clauses(key)) {
            if (op.seqs.contains(c->seq)) seqs.insert(c->seq);
          }
        }
      } else {
        for (const auto& c : state->clauses(PredKey::of(op.pattern))) {
          if (unify(rename_apart(c->clause.head, "#r"), op.pattern)) seqs.insert(c->seq);
        }
      }
      if (seqs.empty()) {
        r.status = UpdateStatus::noop;
        return r;
      }
      state = state->with_removed(seqs);
      r.removed = std::move(seqs);
      return r;
    }
    case Op::Kind::consume: {
      r.removed = consumption_targets(*state, op.id, op.policy);
      if (r.removed.empty()) {
        r.status = UpdateStatus::noop;
        return r;
      }
      state = state->with_removed(r.removed);
      return r;
    }
  }
  return r;
}

Receipt KnowledgeBase::apply_locked(const std::vector<Op>& ops, bool transactional, std::optional<TxnId> txn) {
  std::lock_guard writer(wmu_);
  Receipt total;
  if (!ops.empty()) total.id = ops.front().id;
  auto merge = [&](const Receipt& r) {
    total.added.insert(total.added.end(), r.added.begin(), r.added.end());
    total.removed.insert(r.removed.begin(), r.removed.end());
  };
  if (txn) {
    Txn* t = nullptr;
    {
      std::lock_guard lock(mu_);
      auto it = txns_.find(*txn);
      if (it == txns_.end()) throw std::invalid_argument("unknown or closed transaction " + std::to_string(*txn));
      t = it->second.get();
    }
    StatePtr s = t->state;
    bool changed = false;
    for (const auto& op : ops) {
      Receipt r = run_op(s, op);
      if (r.status == UpdateStatus::rejected) return r;
      if (r.status == UpdateStatus::not_found && ops.size() == 1) return r;
      if (r.status == UpdateStatus::applied) {
        Op recorded = op;
        if (op.kind == Op::Kind::add) {
          // Replay must reuse the very clauses the transaction saw.
          recorded.kind = Op::Kind::add;
        }
        t->ops.push_back(std::move(recorded));
        changed = true;
      }
      merge(r);
    }
    std::lock_guard lock(mu_);
    t->state = s;
    total.status = changed ? UpdateStatus::applied : UpdateStatus::noop;
    return total;
  }
  StatePtr s = snapshot();
  bool changed = false;
  for (const auto& op : ops) {
    Receipt r = run_op(s, op);
    if (r.status == UpdateStatus::rejected) return r;
    if (r.status == UpdateStatus::not_found && ops.size() == 1) return r;
    changed = changed || r.status == UpdateStatus::applied;
    merge(r);
  }
  if (!changed) {
    total.status = UpdateStatus::noop;
    return total;
  }
  if (transactional) {
    IntegrityReport report = check_integrity(s);
    if (!report.ok()) {
      total.status = UpdateStatus::violated;
      total.violations = std::move(report.violations);
      total.message = "integrity violated; update rolled back";
      total.added.clear();
      total.removed.clear();
      return total;
    }
  }
  {
    std::lock_guard lock(mu_);
    state_ = s;
  }
  total.status = UpdateStatus::applied;
  return total;
}

Receipt KnowledgeBase::add_update(const std::string& id, std::vector<Clause> clauses, bool transactional,
                                  std::optional<TxnId> txn) {
  Op op;
  op.kind = Op::Kind::add;
  op.id = id;
  op.clauses = std::move(clauses);
  return apply_locked({op}, transactional, txn);
}

Receipt KnowledgeBase::add_text(const std::string& id, std::string_view text, const std::vector<Term>& args,
                                bool transactional, std::optional<TxnId> txn) {
  return add_update(id, parse_clause_text(text, args), transactional, txn);
}

Receipt KnowledgeBase::remove_update(const std::string& id, bool transactional, std::optional<TxnId> txn) {
  Op op;
  op.kind = Op::Kind::remove_id;
  op.id = id;
  return apply_locked({op}, transactional, txn);
}

Receipt KnowledgeBase::remove_clauses(const std::set<std::uint64_t>& seqs, bool transactional,
                                      std::optional<TxnId> txn) {
  Op op;
  op.kind = Op::Kind::remove_seqs;
  op.seqs = seqs;
  return apply_locked({op}, transactional, txn);
}

Receipt KnowledgeBase::retract_all(const Term& head, bool transactional, std::optional<TxnId> txn) {
  if (!head.is_constant() && !head.is_compound()) throw std::invalid_argument("retract pattern must be callable");
  Op op;
  op.kind = Op::Kind::retract_all;
  op.pattern = head;
  return apply_locked({op}, transactional, txn);
}

Receipt KnowledgeBase::consume(const std::string& key, ConsumptionPolicy policy, std::optional<TxnId> txn) {
  Op op;
  op.kind = Op::Kind::consume;
  op.id = key;
  op.policy = policy;
  return apply_locked({op}, false, txn);
}

TxnId KnowledgeBase::begin_transaction() {
  std::lock_guard lock(mu_);
  TxnId id = next_txn_++;
  auto t = std::make_unique<Txn>();
  t->state = state_;
  txns_[id] = std::move(t);
  return id;
}

bool KnowledgeBase::transaction_open(TxnId txn) const {
  std::lock_guard lock(mu_);
  return txns_.contains(txn);
}

StatePtr KnowledgeBase::transaction_state(TxnId txn) const {
  std::lock_guard lock(mu_);
  auto it = txns_.find(txn);
  if (it == txns_.end()) throw std::invalid_argument("unknown or closed transaction " + std::to_string(txn));
  return it->second->state;
}

Receipt KnowledgeBase::commit(TxnId txn) {
  std::lock_guard writer(wmu_);
  std::unique_ptr<Txn> t;
  {
    std::lock_guard lock(mu_);
    auto it = txns_.find(txn);
    if (it == txns_.end()) throw std::invalid_argument("unknown or closed transaction " + std::to_string(txn));
    t = std::move(it->second);
    txns_.erase(it);
  }
  Receipt total;
  total.id = "txn" + std::to_string(txn);
  if (t->ops.empty()) {
    total.status = UpdateStatus::noop;
    return total;
  }
  StatePtr s = snapshot();
  for (const auto& op : t->ops) {
    Receipt r = run_op(s, op);
    if (r.status == UpdateStatus::rejected) {
      r.message = "commit rejected: " + r.message;
      return r;
    }
    total.added.insert(total.added.end(), r.added.begin(), r.added.end());
    total.removed.insert(r.removed.begin(), r.removed.end());
  }
  IntegrityReport report = check_integrity(s);
  if (!report.ok()) {
    total.status = UpdateStatus::violated;
    total.violations = std::move(report.violations);
    total.message = "integrity violated at commit; transaction rolled back";
    total.added.clear();
    total.removed.clear();
    return total;
  }
  {
    std::lock_guard lock(mu_);
    state_ = s;
  }
  total.status = UpdateStatus::applied;
  return total;
}

Receipt KnowledgeBase::rollback(TxnId txn) {
  std::lock_guard lock(mu_);
  auto it = txns_.find(txn);
  if (it == txns_.end()) throw std::invalid_argument("unknown or closed transaction " + std::to_string(txn));
  txns_.erase(it);
  Receipt r;
  r.id = "txn" + std::to_string(txn);
  r.status = UpdateStatus::applied;
  return r;
}

void KnowledgeBase::query_each(const Term& goal, const QueryOptions& options,
                               const std::function<bool(const Substitution&)>& k) {
  StatePtr view = options.txn ? transaction_state(*options.txn) : snapshot();
  Solver solver(*this, view, options);
  std::set<std::string> vars = variables_of(goal);
  solver.solve(goal, Substitution{}, [&](const Substitution& s) { return k(s.project(vars)); });
}

std::vector<Substitution> KnowledgeBase::query(const Term& goal, const QueryOptions& options) {
  std::vector<Substitution> out;
  if (options.max_answers == 0) return out;
  query_each(goal, options, [&](const Substitution& s) {
    out.push_back(s);
    return out.size() < options.max_answers;
  });
  return out;
}

std::vector<Substitution> KnowledgeBase::query_text(std::string_view goal, const QueryOptions& options) {
  return query(parse_term(goal), options);
}

bool KnowledgeBase::holds(const Term& goal, const QueryOptions& options) {
  QueryOptions o = options;
  o.max_answers = 1;
  return !query(goal, o).empty();
}

void KnowledgeBase::register_test_hook(const std::string& name, const Term& goal) {
  std::lock_guard writer(wmu_);
  hooks_.emplace_back(name, goal);
}

namespace {

struct ConstraintForm {
  std::string kind;
  std::vector<Term> literals;
};

std::optional<ConstraintForm> constraint_form(const Term& c) {
  ConstraintForm f;
  if (c.is_compound() && c.arity() >= 1) {
    f.kind = c.name();
    f.literals.assign(c.args().begin(), c.args().end());
  } else if (c.is_list() && c.arity() >= 2 && c.arg(0).is_constant()) {
    f.kind = c.arg(0).name();
    f.literals.assign(c.args().begin() + 1, c.args().end());
  } else {
    return std::nullopt;
  }
  // A single list argument groups the literals: xor([a, b]).
  if (f.literals.size() == 1 && f.literals[0].is_list()) {
    std::vector<Term> items(f.literals[0].args().begin(), f.literals[0].args().end());
    f.literals = std::move(items);
  }
  if (f.kind != "not" && f.kind != "xor" && f.kind != "or" && f.kind != "and") return std::nullopt;
  if (f.literals.empty()) return std::nullopt;
  return f;
}

}  // namespace

IntegrityReport KnowledgeBase::check_integrity(const StatePtr& state, const QueryOptions& options,
                                               const std::optional<Term>& only_mentioning) {
  QueryOptions o = options;
  o.hypothetical = true;
  o.txn.reset();
  o.step_budget = std::min(o.step_budget, integrity_budget);
  IntegrityReport report;
  std::vector<Term> constraints;
  {
    Solver solver(*this, state, o);
    Term c = Term::variable("C");
    try {
      solver.solve(Term::compound("integrity", {c}), Substitution{}, [&](const Substitution& s) {
        constraints.push_back(apply(s, c));
        return true;
      });
    } catch (const std::runtime_error& e) {
      report.violations.push_back({"integrity/1", std::string("constraints could not be enumerated: ") + e.what()});
      return report;
    }
  }
  for (const auto& c : constraints) {
    auto form = constraint_form(c);
    std::string name = write_term(c);
    if (!form) {
      report.violations.push_back({name, "malformed integrity constraint"});
      continue;
    }
    if (only_mentioning) {
      bool mentions = std::any_of(form->literals.begin(), form->literals.end(), [&](const Term& l) {
        return unify(rename_apart(l, "#m"), *only_mentioning).has_value();
      });
      if (!mentions) continue;
    }
    std::vector<Term> derivable;
    std::vector<Term> missing;
    try {
      for (const auto& lit : form->literals) {
        Solver solver(*this, state, o);
        if (solver.provable(lit)) {
          derivable.push_back(lit);
        } else {
          missing.push_back(lit);
        }
      }
    } catch (const std::runtime_error& e) {
      report.violations.push_back({name, std::string("undecided: ") + e.what()});
      continue;
    }
    auto list = [](const std::vector<Term>& ts) {
      std::string s;
      for (const auto& t : ts) s += (s.empty() ? "" : ", ") + write_term(t);
      return s;
    };
    if (form->kind == "not" && !derivable.empty()) {
      report.violations.push_back({name, "derivable: " + list(derivable)});
    } else if (form->kind == "xor" && derivable.size() >= 2) {
      report.violations.push_back({name, "mutually exclusive conclusions derivable: " + list(derivable)});
    } else if (form->kind == "or" && derivable.empty()) {
      report.violations.push_back({name, "none derivable"});
    } else if (form->kind == "and" && !missing.empty()) {
      report.violations.push_back({name, "not derivable: " + list(missing)});
    }
  }
  if (!only_mentioning) {
    for (const auto& [hook, goal] : hooks_) {
      Solver solver(*this, state, o);
      bool ok = false;
      try {
        ok = solver.provable(goal);
      } catch (const std::runtime_error&) {
        ok = false;
      }
      if (!ok) report.violations.push_back({hook, "test hook failed: " + write_term(goal)});
    }
  }
  return report;
}

IntegrityReport KnowledgeBase::test_integrity(const QueryOptions& options) {
  return check_integrity(options.txn ? transaction_state(*options.txn) : snapshot(), options);
}

IntegrityReport KnowledgeBase::test_integrity_literal(const Term& literal, bool removal, const QueryOptions& options) {
  StatePtr base = options.txn ? transaction_state(*options.txn) : snapshot();
  Clause c = clause_from_term(literal);
  StatePtr hypo;
  if (removal) {
    std::set<std::uint64_t> seqs;
    for (const auto& sc : base->clauses(PredKey::of(c.head))) {
      if (unify(rename_apart(sc->clause.head, "#r"), c.head)) seqs.insert(sc->seq);
    }
    hypo = base->with_removed(seqs);
  } else {
    auto sc = std::make_shared<StoredClause>();
    sc->clause = c;
    sc->update_id = "#hypothetical";
    sc->seq = 0;
    hypo = base->with_added({sc});
  }
  return check_integrity(hypo, options, c.head);
}

}  // namespace reactlog
