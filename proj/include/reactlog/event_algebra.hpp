#pragma once

#include <map>
#include <mutex>
#include <string_view>
#include <vector>

#include "reactlog/event_calculus.hpp"

namespace reactlog {

/// An event algebra expression over event atoms.
///
/// Layout of `items` per operator:
///   sequence/or/xor/and/concurrent: the operands
///   neg:       {A, C} (the window); `forbidden` holds the forbidden patterns
///   any:       {E}; `count` holds n
///   aperiodic: {E, A, C}
///   periodic:  {A, C}; `span` holds the period
struct EventExpr {
  enum class Op { atom, sequence, or_, xor_, and_, concurrent, neg, any, aperiodic, periodic };

  Op op = Op::atom;
  Term atom;
  std::vector<EventExpr> items;
  std::vector<Term> forbidden;
  std::int64_t count = 0;
  Timespan span;

  static EventExpr make_atom(Term t);

  friend bool operator==(const EventExpr& a, const EventExpr& b);
};

const char* op_name(EventExpr::Op op);

/// True for the functors of the nine operators (`sequence`, `or`, ... `periodic`).
bool is_algebra_functor(const Term& t);

/// Reads the textual operator syntax: `sequence(a,b,c)`, `neg([b],[a,c])`,
/// `any(3,a)`, `aperiodic(b,[a,c])`, `periodic(10s,[a,c])`, nestable. A
/// single-element list `[e]` is the atom e. Throws std::invalid_argument on
/// malformed expressions.
EventExpr parse_event_expr(const Term& t);
EventExpr parse_event_expr(std::string_view text);
Term to_term(const EventExpr& e);

/// Every event atom occurring in the expression, in first-occurrence order.
std::vector<Term> event_atoms(const EventExpr& e);

/// Sequence operands with directly nested sequences spliced in.
std::vector<EventExpr> flatten_sequence(const std::vector<EventExpr>& items);

/// Local terminators for the pair (position, position + 1) of a sequence.
/// Strict: every atom of the sequence. Non-strict: atoms of the other operands.
std::vector<Term> terminator_set(const std::vector<EventExpr>& seq_items, std::size_t position, bool strict);

struct Detection {
  Term event;
  TimeInterval interval;
  Term start_term;
  Term end_term;
  std::vector<Occurrence> contributors;
};

using DetectionFn = std::function<bool(const Detection&, const Substitution&)>;

/// Enumerates detections of `e` under `s` over the solver's view.
bool detect_each(Solver& sv, const EventExpr& e, bool strict, const Substitution& s, const DetectionFn& fn);

/// All detections over the current store, sorted by interval end, then start.
std::vector<Detection> detect(KnowledgeBase& kb, const EventExpr& e, bool strict = true,
                              const QueryOptions& options = {});

/// Stores a detection as a transient occurrence `occurs(event, [T1,T2])` under `eis_key`.
Receipt record_detection(KnowledgeBase& kb, const Term& event, const Detection& d, const std::string& eis_key,
                         std::optional<TxnId> txn = std::nullopt);

/// Clock-stepped driver for `periodic` schedules: each poll emits the ticks
/// that fell due since the previous poll as transient `occurs` facts keyed
/// `eis(<event>)`.
class PeriodicScheduler {
 public:
  explicit PeriodicScheduler(KnowledgeBase& kb) : kb_(kb) {}

  /// Registers `event` to recur every `span` inside unbroken [open, close] windows.
  void add(const Term& event, const Timespan& span, const Term& open, const Term& close);
  /// Emits the ticks due up to `now`; returns the synthetic occurrences stored.
  std::vector<Detection> poll(TimePoint now);

 private:
  struct Entry {
    Term event;
    EventExpr expr;
    std::set<std::int64_t> emitted;
  };
  KnowledgeBase& kb_;
  std::mutex mu_;
  std::vector<Entry> entries_;
};

}  // namespace reactlog
