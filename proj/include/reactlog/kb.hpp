#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reactlog/terms.hpp"

namespace reactlog {

/// A fact (empty body) or a rule `head :- body`.
struct Clause {
  Term head;
  std::vector<Term> body;

  [[nodiscard]] bool is_fact() const { return body.empty(); }
  [[nodiscard]] Term to_term() const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Clause&, const Clause&) = default;
};

/// Splits `':-'(H, B)` into head and conjuncts. Throws std::invalid_argument
/// when the head is not a constant or compound.
Clause clause_from_term(const Term& t);

/// Parses clause text (`f(1). r(X) :- f(X).`), filling `_N` placeholders from args.
std::vector<Clause> parse_clause_text(std::string_view text, const std::vector<Term>& args = {});

/// Text key of an update id term: string and constant ids use their text, compounds their canonical form.
std::string update_key(const Term& id);

struct PredKey {
  std::string name;
  std::size_t arity = 0;

  static PredKey of(const Term& t) { return PredKey{t.name(), t.arity()}; }
  auto operator<=>(const PredKey&) const = default;
  [[nodiscard]] std::string to_string() const { return name + "/" + std::to_string(arity); }
};

struct StoredClause {
  Clause clause;
  std::string update_id;
  std::uint64_t seq = 0;
};

using ClausePtr = std::shared_ptr<const StoredClause>;
using ClauseList = std::vector<ClausePtr>;

/// Immutable view of the knowledge base. Every modification produces a new
/// state that shares untouched predicate lists with its parent.
class KbState {
 public:
  KbState() = default;

  [[nodiscard]] const ClauseList& clauses(const PredKey& key) const;
  [[nodiscard]] const ClauseList& clauses(const std::string& name, std::size_t arity) const {
    return clauses(PredKey{name, arity});
  }
  [[nodiscard]] bool has_update(const std::string& id) const { return updates_.contains(id); }
  [[nodiscard]] const ClauseList& update_clauses(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> update_ids() const;
  [[nodiscard]] std::vector<PredKey> predicates() const;
  [[nodiscard]] std::size_t size() const { return size_; }

  [[nodiscard]] std::shared_ptr<const KbState> with_added(const ClauseList& added) const;
  [[nodiscard]] std::shared_ptr<const KbState> with_removed_update(const std::string& id) const;
  [[nodiscard]] std::shared_ptr<const KbState> with_removed(const std::set<std::uint64_t>& seqs) const;

 private:
  std::map<PredKey, std::shared_ptr<const ClauseList>> preds_;
  std::map<std::string, std::shared_ptr<const ClauseList>> updates_;
  std::size_t size_ = 0;
};

using StatePtr = std::shared_ptr<const KbState>;

/// Checks that no predicate depends on itself through `not/1`. Returns a
/// diagnostic naming the offending predicate, or nullopt when stratified.
std::optional<std::string> check_stratified(const KbState& state, const std::function<bool(const PredKey&)>& is_builtin);

struct Violation {
  std::string constraint;
  std::string detail;
};

struct IntegrityReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
};

enum class UpdateStatus { applied, noop, not_found, violated, rejected };

const char* to_string(UpdateStatus s);

/// Outcome of a knowledge update.
struct Receipt {
  UpdateStatus status = UpdateStatus::applied;
  std::string id;
  std::string message;
  std::vector<Violation> violations;
  ClauseList added;
  std::set<std::uint64_t> removed;

  [[nodiscard]] bool ok() const { return status == UpdateStatus::applied || status == UpdateStatus::noop; }
};

enum class ConsumptionPolicy { all, first, last, none };

ConsumptionPolicy policy_from_string(std::string_view s);
const char* to_string(ConsumptionPolicy p);

/// Sequence numbers of the stored occurrences under `key` that `policy`
/// removes. First and last are chronological by occurrence start; ties go to
/// insertion order.
std::set<std::uint64_t> consumption_targets(const KbState& state, const std::string& key, ConsumptionPolicy policy);

/// Raised when a query exhausts its step budget; the answer is unknown rather than "no".
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a query passes its wall-clock deadline.
class QueryTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownHostFunction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Externally implemented predicate. The callable receives the resolved
/// arguments and returns nullopt for failure, an empty vector for plain
/// success, or one term per argument to unify back (output bindings).
struct HostFunction {
  std::string name;
  std::size_t arity = 0;
  std::function<std::optional<std::vector<Term>>(std::span<const Term>)> fn;
  bool side_effecting = false;
};

class HostRegistry {
 public:
  /// Throws std::invalid_argument on a duplicate name/arity.
  void add(HostFunction h);
  /// Exact name first, then the last dotted segment (`Ns.Math.add` finds `add`).
  [[nodiscard]] std::shared_ptr<const HostFunction> find(const std::string& name, std::size_t arity) const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::size_t>, std::shared_ptr<const HostFunction>> fns_;
};

/// Remembers the last firing of periodic `interval/2` schedules per rule.
class ScheduleMemory {
 public:
  /// True (and records `now`) when the schedule `key` is due.
  bool due(const std::string& key, std::int64_t span_ms, TimePoint now);
  void clear();

 private:
  std::mutex mu_;
  std::map<std::string, TimePoint> last_;
};

using TxnId = std::uint64_t;

struct QueryOptions {
  std::size_t step_budget = 1'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Value of `sysTime/1`; defaults to the wall clock.
  std::optional<TimePoint> now;
  /// Bind `sysTime/1` to integer millis instead of a datetime literal.
  bool numeric_time = false;
  /// Hypothetical evaluation: writes stay in the query view and side-effecting host calls are skipped.
  bool hypothetical = false;
  std::optional<TxnId> txn;
  ScheduleMemory* schedule = nullptr;
  std::string schedule_scope;
  /// Algebra interpretation used by `event/2` and `holdsInterval/3`.
  bool strict = true;
  std::size_t max_answers = static_cast<std::size_t>(-1);
};

class Solver;

/// The knowledge base: ID-labelled updates, transactions, integrity
/// constraints, and top-down queries. Readers work on immutable snapshots;
/// writers serialize on an internal mutex and publish whole states.
class KnowledgeBase {
 public:
  KnowledgeBase();
  ~KnowledgeBase();
  KnowledgeBase(const KnowledgeBase&) = delete;
  KnowledgeBase& operator=(const KnowledgeBase&) = delete;

  [[nodiscard]] StatePtr snapshot() const;

  Receipt add_update(const std::string& id, std::vector<Clause> clauses, bool transactional = false,
                     std::optional<TxnId> txn = std::nullopt);
  Receipt add_text(const std::string& id, std::string_view text, const std::vector<Term>& args = {},
                   bool transactional = false, std::optional<TxnId> txn = std::nullopt);
  Receipt remove_update(const std::string& id, bool transactional = false, std::optional<TxnId> txn = std::nullopt);
  /// Removes individual stored clauses (by sequence number).
  Receipt remove_clauses(const std::set<std::uint64_t>& seqs, bool transactional = false,
                         std::optional<TxnId> txn = std::nullopt);
  /// Removes every stored clause whose head unifies with `head` (and, for rules, whose body matches `body` if given).
  Receipt retract_all(const Term& head, bool transactional = false, std::optional<TxnId> txn = std::nullopt);
  /// Removes transient occurrences stored under `key` according to `policy`.
  Receipt consume(const std::string& key, ConsumptionPolicy policy, std::optional<TxnId> txn = std::nullopt);

  TxnId begin_transaction();
  Receipt commit(TxnId txn);
  Receipt rollback(TxnId txn);
  [[nodiscard]] bool transaction_open(TxnId txn) const;
  /// The private state of an open transaction. Throws std::invalid_argument for unknown ids.
  [[nodiscard]] StatePtr transaction_state(TxnId txn) const;

  /// All answers (up to options.max_answers), in depth-first clause order.
  std::vector<Substitution> query(const Term& goal, const QueryOptions& options = {});
  std::vector<Substitution> query_text(std::string_view goal, const QueryOptions& options = {});
  /// Streams answers; the callback returns false to stop.
  void query_each(const Term& goal, const QueryOptions& options, const std::function<bool(const Substitution&)>& k);
  bool holds(const Term& goal, const QueryOptions& options = {});

  IntegrityReport test_integrity(const QueryOptions& options = {});
  /// Hypothetically asserts (or, with `removal`, retracts) `literal` and checks
  /// the constraints that mention it. The knowledge base is never changed.
  IntegrityReport test_integrity_literal(const Term& literal, bool removal = false, const QueryOptions& options = {});

  /// Integrity evaluation over an explicit state (used by commit paths and tests).
  IntegrityReport check_integrity(const StatePtr& state, const QueryOptions& options = {},
                                  const std::optional<Term>& only_mentioning = std::nullopt);

  /// Registers a goal that must succeed after every transactional update.
  void register_test_hook(const std::string& name, const Term& goal);
  void register_host_function(HostFunction h) { hosts_.add(std::move(h)); }
  [[nodiscard]] const HostRegistry& hosts() const { return hosts_; }

  /// Default step budget used by integrity checks.
  std::size_t integrity_budget = 200'000;

 private:
  struct Op;
  struct Txn;

  Receipt apply_locked(const std::vector<Op>& ops, bool transactional, std::optional<TxnId> txn);
  Receipt run_op(StatePtr& state, const Op& op);
  std::optional<std::string> stratification_error(const KbState& s) const;

  mutable std::mutex mu_;   // guards state_ and txns_
  std::mutex wmu_;          // serializes writers
  StatePtr state_;
  std::map<TxnId, std::unique_ptr<Txn>> txns_;
  TxnId next_txn_ = 1;
  std::atomic<std::uint64_t> next_seq_{1};
  std::vector<std::pair<std::string, Term>> hooks_;
  HostRegistry hosts_;
};

}  // namespace reactlog
