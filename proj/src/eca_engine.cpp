#include "reactlog/eca_engine.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <future>
#include <thread>

#include "reactlog/event_algebra.hpp"
#include "reactlog/solver.hpp"
#include "reactlog/syntax.hpp"

namespace reactlog {

bool EcaRule::cut() const { return post && post->is_constant() && post->name() == "!"; }

Term EcaRule::to_term(bool with_oid) const {
  int blank = 0;
  auto part = [&](const std::optional<Term>& p) {
    return p ? *p : Term::variable("_B" + std::to_string(blank++));
  };
  const std::optional<Term> act =
      transactional && action ? std::optional<Term>(Term::compound("transaction", {*action})) : action;
  std::vector<Term> args;
  if (with_oid) args.push_back(Term::constant(oid));
  for (const std::optional<Term>* p : {&time, &event, &condition, &act, &post, &else_action}) args.push_back(part(*p));
  return Term::compound("eca", std::move(args));
}

namespace {

bool blank(const Term& t) { return t.is_variable() || (t.is_constant() && t.name() == "true"); }

std::optional<Term> part_of(const Term& t) {
  if (blank(t)) return std::nullopt;
  return t;
}

}  // namespace

std::optional<EcaRule> normalize_rule(const Term& fact, std::string& diagnostic) {
  if (!fact.is_compound() || fact.name() != "eca" || fact.arity() < 1 || fact.arity() > 7) {
    diagnostic = "not an eca/1..7 fact: " + write_term(fact);
    return std::nullopt;
  }
  auto a = fact.args();
  EcaRule r;
  std::size_t base = 0;
  switch (a.size()) {
    case 1:
      r.action = part_of(a[0]);
      break;
    case 2:
      r.event = part_of(a[0]);
      r.action = part_of(a[1]);
      break;
    case 3:
      r.event = part_of(a[0]);
      r.condition = part_of(a[1]);
      r.action = part_of(a[2]);
      break;
    case 7:
      if (a[0].is_variable()) {
        diagnostic = "eca/7 needs a bound oid: " + write_term(fact);
        return std::nullopt;
      }
      r.oid = symbol_text(a[0]);
      base = 1;
      [[fallthrough]];
    default:
      r.time = part_of(a[base + 0]);
      r.event = part_of(a[base + 1]);
      r.condition = part_of(a[base + 2]);
      r.action = part_of(a[base + 3]);
      if (a.size() - base > 4) r.post = part_of(a[base + 4]);
      if (a.size() - base > 5) r.else_action = part_of(a[base + 5]);
      break;
  }
  for (const auto* p : {&r.time, &r.event, &r.condition, &r.action, &r.post, &r.else_action}) {
    if (*p && p->value().is_literal()) {
      diagnostic = "eca part is a data literal: " + write_term(fact);
      return std::nullopt;
    }
  }
  if (r.action && (r.action->has_functor("transaction", 1) || r.action->has_functor("transaction", 2))) {
    r.transactional = true;
    r.action = r.action->arg(0);
  }
  return r;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::none: return "none";
    case Phase::time: return "time";
    case Phase::event: return "event";
    case Phase::condition: return "condition";
    case Phase::action: return "action";
    case Phase::postcondition: return "postcondition";
  }
  return "?";
}

// ---------------------------------------------------------------------------

class EcaEngine::Pool {
 public:
  explicit Pool(std::size_t n) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, n); ++i) {
      workers_.emplace_back([this] { work(); });
    }
  }
  ~Pool() {
    {
      std::lock_guard lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  std::future<RuleOutcome> submit(std::function<RuleOutcome()> fn) {
    auto task = std::make_shared<std::packaged_task<RuleOutcome()>>(std::move(fn));
    auto fut = task->get_future();
    {
      std::lock_guard lock(mu_);
      queue_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut;
  }

 private:
  void work() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return done_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> workers_;
  bool done_ = false;
};

EcaEngine::EcaEngine(KnowledgeBase& kb, EngineOptions options) : kb_(kb), options_(std::move(options)) {}

EcaEngine::~EcaEngine() = default;

Term EcaEngine::time_term(TimePoint t) const {
  return options_.numeric_time ? Term::integer(t.millis) : Term::datetime(t);
}

std::vector<EcaRule> EcaEngine::poll_rules(std::vector<std::string>* diagnostics) {
  StatePtr view = kb_.snapshot();
  std::vector<ClausePtr> facts;
  for (std::size_t arity = 1; arity <= 7; ++arity) {
    for (const auto& sc : view->clauses("eca", arity)) {
      if (sc->clause.is_fact()) {
        facts.push_back(sc);
      } else if (diagnostics) {
        diagnostics->push_back("eca rule with a body ignored: " + sc->clause.to_string());
      }
    }
  }
  std::stable_sort(facts.begin(), facts.end(), [](const ClausePtr& a, const ClausePtr& b) { return a->seq < b->seq; });
  std::vector<EcaRule> rules;
  rules.reserve(facts.size());
  for (const auto& sc : facts) {
    std::string diag;
    auto r = normalize_rule(sc->clause.head, diag);
    if (!r) {
      if (diagnostics) diagnostics->push_back(diag);
      continue;
    }
    if (r->oid.empty()) r->oid = "r" + std::to_string(sc->seq);
    rules.push_back(std::move(*r));
  }
  return rules;
}

RuleOutcome EcaEngine::evaluate_rule(const EcaRule& rule, TimePoint now, std::size_t cycle) {
  RuleOutcome out;
  out.cycle = cycle;
  out.oid = rule.oid;
  auto started = std::chrono::steady_clock::now();

  QueryOptions o;
  o.step_budget = options_.step_budget;
  o.deadline = started + options_.rule_timeout;
  o.now = now;
  o.numeric_time = options_.numeric_time;
  o.schedule = &schedule_;
  o.schedule_scope = rule.oid;
  o.strict = options_.strict;
  Solver sv(kb_, kb_.snapshot(), o);

  auto reach = [&](Phase p) {
    if (p > out.phase) {
      out.phase = p;
      out.trace.emplace_back(to_string(p));
    }
  };
  const Term yes = Term::constant("true");
  auto goal = [&](const std::optional<Term>& p) { return p ? *p : yes; };
  Term event_goal = yes;
  if (rule.event) {
    event_goal = is_algebra_functor(*rule.event)
                     ? Term::compound("event", {*rule.event, Term::variable("Interval#eca")})
                     : *rule.event;
  }

  std::optional<TxnId> open_txn;
  StatePtr before_txn;
  auto abandon_txn = [&] {
    if (!open_txn) return;
    sv.set_transaction(std::nullopt);
    if (kb_.transaction_open(*open_txn)) kb_.rollback(*open_txn);
    sv.reset_view(before_txn);
    open_txn.reset();
  };

  // Runs action and postcondition for one binding; true when both succeed.
  auto attempt = [&](const Substitution& s) {
    reach(Phase::action);
    if (rule.transactional) {
      before_txn = sv.view_ptr();
      open_txn = kb_.begin_transaction();
      sv.set_transaction(open_txn);
    }
    bool ok = false;
    sv.solve(goal(rule.action), s, [&](const Substitution& sa) {
      reach(Phase::postcondition);
      if (!rule.post || rule.cut() || sv.provable(*rule.post, sa)) {
        ok = true;
        out.bindings = sa;
        return false;
      }
      return true;
    });
    if (!rule.transactional) return ok;
    sv.set_transaction(std::nullopt);
    TxnId id = *open_txn;
    if (!ok) {
      abandon_txn();
      out.rolled_back = true;
      return false;
    }
    open_txn.reset();
    Receipt r = kb_.commit(id);
    if (!r.ok()) {
      sv.reset_view(before_txn);
      out.rolled_back = true;
      out.errors.push_back("action rolled back: " + r.message);
      return false;
    }
    return true;
  };

  try {
    bool time_ok = false;
    sv.solve(goal(rule.time), Substitution{}, [&](const Substitution& s1) {
      time_ok = true;
      reach(Phase::time);
      return sv.solve(event_goal, s1, [&](const Substitution& s2) {
        reach(Phase::event);
        return sv.solve(goal(rule.condition), s2, [&](const Substitution& s3) {
          reach(Phase::condition);
          if (!attempt(s3)) return true;
          out.fired = true;
          ++out.action_runs;
          return !rule.cut();
        });
      });
    });
    if (time_ok && !out.fired && rule.else_action) {
      out.trace.emplace_back("else");
      out.else_fired = sv.provable(*rule.else_action);
    }
  } catch (const QueryTimeout& e) {
    abandon_txn();
    out.timed_out = true;
    out.errors.emplace_back(std::string("timeout: ") + e.what());
  } catch (const std::exception& e) {
    abandon_txn();
    out.errors.emplace_back(e.what());
  }
  out.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

RunReport EcaEngine::run(const RunConfig& config) {
  if (config.poll.total_millis() <= 0) throw std::invalid_argument("poll span must be positive");
  RunReport report;
  if (!options_.serial) pool_ = std::make_unique<Pool>(options_.threads);
  auto wall_start = std::chrono::steady_clock::now();
  for (std::size_t cycle = 1;; ++cycle) {
    TimePoint now;
    if (config.start) {
      now = TimePoint{config.start->millis + static_cast<std::int64_t>(cycle - 1) * config.poll.total_millis()};
    } else {
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch());
      now = TimePoint{ms.count()};
    }
    if (config.before_cycle) config.before_cycle(cycle, now);
    auto rules = poll_rules(&report.diagnostics);

    std::vector<RuleOutcome> outcomes;
    outcomes.reserve(rules.size());
    if (options_.serial) {
      for (const auto& r : rules) outcomes.push_back(evaluate_rule(r, now, cycle));
    } else {
      std::vector<std::future<RuleOutcome>> futures;
      futures.reserve(rules.size());
      for (std::size_t i = 0; i < rules.size(); ++i) {
        if (i >= options_.queue_capacity) {
          RuleOutcome d;
          d.cycle = cycle;
          d.oid = rules[i].oid;
          d.deferred = true;
          d.errors.emplace_back("executor saturated; rule deferred to the next cycle");
          futures.push_back(std::async(std::launch::deferred, [d] { return d; }));
          continue;
        }
        const EcaRule& rule = rules[i];
        futures.push_back(pool_->submit([this, &rule, now, cycle] { return evaluate_rule(rule, now, cycle); }));
      }
      for (auto& f : futures) outcomes.push_back(f.get());
    }

    bool any_fired = false;
    for (auto& oc : outcomes) {
      any_fired = any_fired || oc.fired || oc.else_fired;
      if (config.sink) config.sink(oc);
      report.outcomes.push_back(std::move(oc));
    }
    report.cycles = cycle;

    if (config.cycles != 0 && cycle >= config.cycles) break;
    if (config.wall_limit && std::chrono::steady_clock::now() - wall_start >= *config.wall_limit) break;
    if (config.until_quiet && !any_fired && !(config.pending && config.pending())) break;
    if (!config.start) std::this_thread::sleep_for(std::chrono::milliseconds(config.poll.total_millis()));
  }
  pool_.reset();
  return report;
}

Receipt EcaEngine::inject_event(const Term& event, TimePoint at, std::optional<std::string> eis_key) {
  std::string key = eis_key ? *eis_key : update_key(Term::compound("eis", {event}));
  Clause c{Term::compound("occurs", {event, time_term(at)}), {}};
  return kb_.add_update(key, {c});
}

}  // namespace reactlog
