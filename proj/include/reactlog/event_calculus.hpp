#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "reactlog/kb.hpp"
#include "reactlog/solver.hpp"

namespace reactlog {

/// One event instance: a stored `occurs/2` (transient) or `happens/2`
/// (persistent) fact, or an answer of a derived `happens/2` rule.
struct Occurrence {
  enum class Kind { transient, persistent };

  Term event;
  TimeInterval interval;
  /// The time terms as written, so answers keep the caller's representation.
  Term start_term;
  Term end_term;
  Kind kind = Kind::persistent;
  /// Sequence number of the stored fact; 0 for derived instances.
  std::uint64_t seq = 0;
  /// Update id the fact was stored under (its EIS key).
  std::string eis_key;
};

/// Which occurrence kinds an enumeration draws from.
enum class OccurrenceScope { transient, persistent, both };

using OccurrenceFn = std::function<bool(const Occurrence&, const Substitution&)>;

/// Reads `T`, `datetime(...)` or `[T1,T2]` as an interval.
std::optional<TimeInterval> interval_from_term(const Term& t);

/// A time term shaped like `like`: integers stay integers, anything else
/// becomes a datetime literal.
Term time_term_like(const Term& like, TimePoint t);

// --- solver-level primitives (used by builtins and the algebra) -------------

/// Enumerates occurrences whose event unifies with `pattern` under `s`. Stored
/// facts come first in insertion order, then answers of derived rules.
/// Returns false when the callback asked to stop.
bool for_each_occurrence(Solver& sv, const Term& pattern, const Substitution& s, OccurrenceScope scope,
                         const OccurrenceFn& fn);

/// Fluent instance answered by a holdsAt evaluation, with the time of the
/// initiating event (absent for `initially`).
struct FluentAnswer {
  Term fluent;
  std::optional<TimePoint> since;
  Term since_term;
};

/// Evaluates holdsAt(fluent, t). With `through` set, events at exactly t take
/// effect (used for "the current state"). With `every_initiation`, each
/// unclipped initiation is reported instead of one answer per fluent.
bool ec_holds(Solver& sv, const Term& fluent, TimePoint t, bool through, bool every_initiation,
              const std::function<bool(const FluentAnswer&)>& fn);

/// clipped/declipped: a persistent event strictly inside (t1, t2) terminates
/// (initiates) the fluent.
bool ec_clipped(Solver& sv, std::optional<TimePoint> t1, const Term& fluent, TimePoint t2, bool declipped);

/// True if a global interval terminator for [e1,e2] or an occurrence of one of
/// the local terminator patterns lies strictly inside (t1, t2).
bool ec_broken(Solver& sv, TimePoint t1, const Term& e1, const Term& e2, TimePoint t2, const std::vector<Term>& local);

/// Unbroken [e1,e2] intervals: pairs of an e1 instance and a later e2 instance.
bool ec_intervals(Solver& sv, const Term& e1, const Term& e2, const std::vector<Term>& local, const Substitution& s,
                  const std::function<bool(const Occurrence&, const Occurrence&, const Substitution&)>& fn);

// --- knowledge base level convenience ---------------------------------------

bool holds_at(KnowledgeBase& kb, const Term& fluent, TimePoint t, const QueryOptions& options = {});
bool clipped(KnowledgeBase& kb, TimePoint t1, const Term& fluent, TimePoint t2, const QueryOptions& options = {});
bool declipped(KnowledgeBase& kb, TimePoint t1, const Term& fluent, TimePoint t2, const QueryOptions& options = {});
std::vector<TimeInterval> holds_interval_free(KnowledgeBase& kb, const Term& e1, const Term& e2,
                                              const std::vector<Term>& terminators, const QueryOptions& options = {});
bool holds_interval_bound(KnowledgeBase& kb, const Term& e1, const Term& e2, const TimeInterval& window,
                          const std::vector<Term>& terminators, const QueryOptions& options = {});
bool broken(KnowledgeBase& kb, TimePoint t1, const Term& e1, const Term& e2, TimePoint t2,
            const std::vector<Term>& local_terminators, const QueryOptions& options = {});
/// Value of a trajectory parameter at t, or nullopt when no trajectory fluent holds.
std::optional<Term> value_at(KnowledgeBase& kb, const Term& parameter, TimePoint t, const QueryOptions& options = {});

}  // namespace reactlog
