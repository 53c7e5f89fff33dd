#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reactlog/kb.hpp"

namespace reactlog {

/// Depth-first SLD resolution with negation as failure over one knowledge
/// base view. Answers are delivered to a continuation that returns false to
/// stop the search.
///
/// Each query owns a private view of the store. Writes made by the query go to
/// the knowledge base (unless hypothetical) and are mirrored into the view, so
/// later goals of the same query see them.
class Solver {
 public:
  using Cont = std::function<bool(const Substitution&)>;

  Solver(KnowledgeBase& kb, StatePtr view, QueryOptions options);

  /// Proves `goal` under `s`; returns false when a continuation asked to stop.
  bool solve(const Term& goal, const Substitution& s, const Cont& k);
  bool solve_all(std::span<const Term> goals, const Substitution& s, const Cont& k);

  /// First answer, if any.
  std::optional<Substitution> first(const Term& goal, const Substitution& s = {});
  bool provable(const Term& goal, const Substitution& s = {}) { return first(goal, s).has_value(); }

  /// Resolves `goal` against stored clauses only (no builtins).
  bool solve_clauses(const Term& goal, const Substitution& s, const Cont& k);

  [[nodiscard]] const KbState& view() const { return *view_; }
  [[nodiscard]] StatePtr view_ptr() const { return view_; }
  [[nodiscard]] KnowledgeBase& kb() { return kb_; }
  [[nodiscard]] const QueryOptions& options() const { return options_; }
  [[nodiscard]] TimePoint now() const;
  /// Renders a time point the way `sysTime/1` does.
  [[nodiscard]] Term time_term(TimePoint t) const;
  [[nodiscard]] std::size_t steps() const { return steps_; }

  /// Counts one inference step; throws BudgetExceeded / QueryTimeout.
  void tick();

  /// Fresh suffix for renaming clause variables apart.
  std::string fresh_suffix();

  /// Write paths used by update builtins.
  Receipt write_add(const std::string& id, std::vector<Clause> clauses, bool transactional);
  Receipt write_remove(const std::string& id, bool transactional);
  Receipt write_remove_clauses(const std::set<std::uint64_t>& seqs, bool transactional);
  Receipt write_consume(const std::string& key, ConsumptionPolicy policy);
  /// Routes subsequent writes into an open knowledge base transaction (or back to direct writes).
  void set_transaction(std::optional<TxnId> txn) { options_.txn = txn; }
  /// Replaces the query view (used when a transaction is abandoned).
  void reset_view(StatePtr view) { view_ = std::move(view); }

  /// Ancestor goals for the variant loop check.
  bool enter(const Term& goal);
  void leave();

 private:
  void mirror(const Receipt& r);
  bool call_host(const HostFunction& h, std::span<const Term> args, const Substitution& s, const Cont& k);

  KnowledgeBase& kb_;
  StatePtr view_;
  QueryOptions options_;
  std::size_t steps_ = 0;
  std::vector<Term> ancestors_;
};

using BuiltinFn = std::function<bool(Solver&, std::span<const Term> args, const Substitution& s, const Solver::Cont& k)>;

struct Builtin {
  BuiltinFn fn;
  /// Participates in the variant loop check (for builtins that recurse into the store).
  bool loop_checked = false;
};

class BuiltinTable {
 public:
  void add(const std::string& name, std::size_t arity, BuiltinFn fn, bool loop_checked = false);
  [[nodiscard]] const Builtin* find(const std::string& name, std::size_t arity) const;
  [[nodiscard]] bool contains(const PredKey& k) const { return find(k.name, k.arity) != nullptr; }

 private:
  std::map<PredKey, Builtin> table_;
};

/// Every builtin known to the engine: control, comparison, arithmetic,
/// updates, integrity tests, Event Calculus and algebra predicates.
const BuiltinTable& standard_builtins();

void install_core_builtins(BuiltinTable& t);
void install_update_builtins(BuiltinTable& t);
void install_event_calculus_builtins(BuiltinTable& t);
void install_algebra_builtins(BuiltinTable& t);

/// Evaluates an arithmetic expression (`+ - * / mod`, integer and float
/// literals, datetime +/- millis, datetime - datetime). Returns nullopt when
/// the expression is not ground or not numeric.
std::optional<Term> eval_arith(const Term& e);

}  // namespace reactlog
