#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reactlog/kb.hpp"

namespace reactlog {

/// A reactive rule eca(Time, Event, Condition, Action, Post, Else) with absent
/// parts normalized away. Absent parts count as true; an absent action is a no-op.
struct EcaRule {
  std::string oid;
  std::optional<Term> time;
  std::optional<Term> event;
  std::optional<Term> condition;
  std::optional<Term> action;
  std::optional<Term> post;
  std::optional<Term> else_action;
  /// Action (plus postcondition) runs inside a kb transaction.
  bool transactional = false;

  /// True when the postcondition is the cut marker `!`.
  [[nodiscard]] bool cut() const;
  /// The canonical eca/6 (or eca/7 with oid) fact.
  [[nodiscard]] Term to_term(bool with_oid = false) const;

  friend bool operator==(const EcaRule&, const EcaRule&) = default;
};

/// Normalizes an eca/1..7 fact. Arity layout:
///   1: A   2: E,A   3: E,C,A   4: T,E,C,A   5: T,E,C,A,P   6: T,E,C,A,P,EL   7: Oid,T,E,C,A,P,EL
/// Unbound variables and `true` mark blank parts. Returns nullopt with a
/// diagnostic for malformed facts.
std::optional<EcaRule> normalize_rule(const Term& fact, std::string& diagnostic);

enum class Phase { none, time, event, condition, action, postcondition };
const char* to_string(Phase p);

struct RuleOutcome {
  std::size_t cycle = 0;
  std::string oid;
  /// Furthest phase reached.
  Phase phase = Phase::none;
  /// Phases entered, in order; "else" is appended when the else action ran.
  std::vector<std::string> trace;
  bool fired = false;
  bool else_fired = false;
  std::size_t action_runs = 0;
  bool timed_out = false;
  bool rolled_back = false;
  bool deferred = false;
  /// Bindings of the last successful action.
  Substitution bindings;
  std::vector<std::string> errors;
  double duration_ms = 0;
};

struct EngineOptions {
  std::size_t step_budget = 1'000'000;
  /// Per-rule evaluation timeout.
  std::chrono::milliseconds rule_timeout{5000};
  bool strict = true;
  /// Time terms as integer millis instead of datetime literals.
  bool numeric_time = false;
  /// Worker threads for concurrent rule evaluation.
  std::size_t threads = 4;
  /// Maximum rules queued per cycle before the rest are deferred.
  std::size_t queue_capacity = 1u << 20;
  /// Evaluate every rule on the demon thread, in rule order.
  bool serial = false;
};

struct RunConfig {
  Timespan poll = Timespan::from_millis(10'000);
  /// Stop after this many cycles (0: no cap).
  std::size_t cycles = 0;
  /// Stop after this much wall time.
  std::optional<std::chrono::milliseconds> wall_limit;
  /// Stop after a cycle in which nothing fired and `pending` reports no more input.
  bool until_quiet = false;
  std::function<bool()> pending;
  /// Virtual clock start; the clock of cycle k is start + k * poll. Wall clock when absent.
  std::optional<TimePoint> start;
  /// Called before each cycle with its clock (trace replay, scripted injections).
  std::function<void(std::size_t cycle, TimePoint now)> before_cycle;
  /// Receives each outcome as soon as its cycle completes.
  std::function<void(const RuleOutcome&)> sink;
};

struct RunReport {
  std::size_t cycles = 0;
  std::vector<RuleOutcome> outcomes;
  std::vector<std::string> diagnostics;
};

/// The ECA processor: polls eca facts from the knowledge base and evaluates
/// them each cycle, concurrently unless configured serial.
class EcaEngine {
 public:
  explicit EcaEngine(KnowledgeBase& kb, EngineOptions options = {});
  ~EcaEngine();
  EcaEngine(const EcaEngine&) = delete;
  EcaEngine& operator=(const EcaEngine&) = delete;

  /// Current eca facts, normalized, in insertion order. Malformed facts are
  /// skipped and described in `diagnostics`.
  std::vector<EcaRule> poll_rules(std::vector<std::string>* diagnostics = nullptr);

  RuleOutcome evaluate_rule(const EcaRule& rule, TimePoint now, std::size_t cycle = 0);

  RunReport run(const RunConfig& config);

  /// Stores `occurs(event, at)` under `eis_key` (default `eis(event)`).
  Receipt inject_event(const Term& event, TimePoint at, std::optional<std::string> eis_key = std::nullopt);

  void register_host_function(HostFunction h) { kb_.register_host_function(std::move(h)); }

  [[nodiscard]] KnowledgeBase& kb() { return kb_; }
  [[nodiscard]] const EngineOptions& options() const { return options_; }
  [[nodiscard]] ScheduleMemory& schedule() { return schedule_; }

 private:
  class Pool;

  Term time_term(TimePoint t) const;

  KnowledgeBase& kb_;
  EngineOptions options_;
  ScheduleMemory schedule_;
  std::unique_ptr<Pool> pool_;
};

}  // namespace reactlog
