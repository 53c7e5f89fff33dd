// reactlog: command-line front end.
//
//   reactlog detect  --trace t.trace --expr 'sequence(a,b)' [--rules r.lp] [--mode strict|nonstrict]
//   reactlog run     --rules r.lp [--trace t.trace] [--poll 10s] [--cycles k] [--serial]
//   reactlog bench   --family eca_basic|ec_basic [--n 1000,2000] [--reps 5]
//   reactlog convert input --format text|ecarml [-o out]
//   reactlog check   file...
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or parse error.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "reactlog/bench.hpp"
#include "reactlog/eca_engine.hpp"
#include "reactlog/event_algebra.hpp"
#include "reactlog/io.hpp"
#include "reactlog/ruleml.hpp"
#include "reactlog/syntax.hpp"

using namespace reactlog;
using json = nlohmann::json;

namespace {

// Input that does not parse or violates the command's contract; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool parse_mode(const std::string& mode) {
  if (mode == "strict") return true;
  if (mode == "nonstrict") return false;
  throw UsageError("--mode must be strict or nonstrict");
}

void load_rules(KnowledgeBase& kb, const std::vector<std::string>& files) {
  for (const auto& f : files) {
    Receipt r;
    try {
      r = load_program(kb, f);
    } catch (const ParseError& e) {
      throw UsageError(f + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what());
    } catch (const ruleml::RuleMLError& e) {
      throw UsageError(f + ": " + e.what());
    }
    if (!r.ok()) throw std::runtime_error(f + ": " + to_string(r.status) + " " + r.message);
  }
}

Trace load_trace(const std::string& path) {
  try {
    return read_trace_file(path);
  } catch (const ParseError& e) {
    throw UsageError(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

TimePoint parse_time(const std::string& text, bool numeric) {
  if (numeric) {
    try {
      return TimePoint{std::stoll(text)};
    } catch (const std::exception&) {
      throw UsageError("expected an integer time, got '" + text + "'");
    }
  }
  auto tp = parse_iso8601(text);
  if (!tp) throw UsageError("expected an ISO 8601 time, got '" + text + "'");
  return *tp;
}

std::string occurrence_text(const Occurrence& o) {
  std::string when = o.interval.start() == o.interval.end()
                         ? time_text(o.start_term)
                         : "[" + time_text(o.start_term) + "," + time_text(o.end_term) + "]";
  return write_term(o.event) + "@" + when;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  std::vector<std::string> rules;
  std::string trace;
  std::string expr;
  std::string mode = "strict";
};

int cmd_detect(const DetectArgs& a) {
  bool strict = parse_mode(a.mode);
  EventExpr expr;
  try {
    expr = parse_event_expr(std::string_view(a.expr));
  } catch (const ParseError& e) {
    throw UsageError("bad expression: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw UsageError("bad expression: " + std::string(e.what()));
  }
  KnowledgeBase kb;
  load_rules(kb, a.rules);
  Trace trace = load_trace(a.trace);
  for (const auto& r : trace.records) apply_record(kb, r, trace.numeric_time);
  QueryOptions opts;
  opts.numeric_time = trace.numeric_time;
  if (!trace.records.empty()) opts.now = trace.records.back().at;
  for (const auto& d : detect(kb, expr, strict, opts)) {
    std::string contributors;
    for (const auto& c : d.contributors) {
      if (!contributors.empty()) contributors += ",";
      contributors += occurrence_text(c);
    }
    std::cout << write_term(d.event) << " [" << time_text(d.start_term) << "," << time_text(d.end_term)
              << "] contributors=" << contributors << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::vector<std::string> rules;
  std::string trace;
  std::string poll = "10s";
  std::size_t cycles = 0;
  bool serial = false;
  std::string start;
  std::vector<std::string> outages;
  std::vector<std::string> queries;
  std::string report;
  std::string mode = "strict";
  std::size_t timeout_ms = 5000;
};

int cmd_run(const RunArgs& a) {
  Timespan poll;
  try {
    poll = Timespan::parse(a.poll);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--poll: ") + e.what());
  }
  if (poll.total_millis() <= 0) throw UsageError("--poll must be positive");

  KnowledgeBase kb;
  load_rules(kb, a.rules);
  Trace trace;
  if (!a.trace.empty()) trace = load_trace(a.trace);
  bool numeric = trace.numeric_time;

  std::vector<std::pair<TimePoint, TimePoint>> outages;
  for (const auto& o : a.outages) {
    auto slash = o.find('/');
    if (slash == std::string::npos) throw UsageError("--outage expects FROM/TO");
    outages.emplace_back(parse_time(o.substr(0, slash), numeric), parse_time(o.substr(slash + 1), numeric));
  }

  TimePoint start;
  if (!a.start.empty()) {
    start = parse_time(a.start, numeric);
  } else if (!trace.records.empty()) {
    start = trace.records.front().at;
  } else {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now().time_since_epoch());
    start = TimePoint{ms.count() - ms.count() % poll.total_millis()};
  }

  EngineOptions eo;
  eo.serial = a.serial;
  eo.strict = parse_mode(a.mode);
  eo.numeric_time = numeric;
  eo.rule_timeout = std::chrono::milliseconds(a.timeout_ms);
  EcaEngine engine(kb, eo);

  std::atomic<std::int64_t> clock{start.millis};
  auto now_text = [&] {
    TimePoint t{clock.load()};
    return numeric ? std::to_string(t.millis) : format_iso8601(t);
  };
  engine.register_host_function(HostFunction{
      "WebService.ping", 1,
      [&](std::span<const Term>) -> std::optional<std::vector<Term>> {
        TimePoint t{clock.load()};
        for (const auto& [from, to] : outages) {
          if (from <= t && t < to) return std::nullopt;
        }
        return std::vector<Term>{};
      },
      false});
  engine.register_host_function(HostFunction{
      "notify", 2,
      [&](std::span<const Term> args) -> std::optional<std::vector<Term>> {
        std::cerr << "notify " << now_text() << " " << write_term(args[0]) << " " << write_term(args[1]) << "\n";
        return std::vector<Term>{};
      },
      true});

  std::ofstream report_file;
  if (!a.report.empty()) {
    report_file.open(a.report);
    if (!report_file) throw std::runtime_error("cannot write " + a.report);
  }
  std::ostream& out = a.report.empty() ? std::cout : report_file;

  std::size_t next = 0;
  RunConfig cfg;
  cfg.poll = poll;
  cfg.cycles = a.cycles;
  cfg.start = start;
  cfg.until_quiet = a.cycles == 0;
  cfg.pending = [&] { return next < trace.records.size(); };
  cfg.before_cycle = [&](std::size_t, TimePoint now) {
    clock = now.millis;
    while (next < trace.records.size() && trace.records[next].at <= now) {
      Receipt r = apply_record(kb, trace.records[next], numeric);
      if (!r.ok()) std::cerr << "trace line " << trace.records[next].line << ": " << r.message << "\n";
      ++next;
    }
  };
  cfg.sink = [&](const RuleOutcome& o) {
    json j;
    j["cycle"] = o.cycle;
    j["time"] = now_text();
    j["oid"] = o.oid;
    j["phase"] = to_string(o.phase);
    j["fired"] = o.fired;
    j["else_fired"] = o.else_fired;
    j["action_runs"] = o.action_runs;
    j["duration_ms"] = o.duration_ms;
    j["trace"] = o.trace;
    if (o.timed_out) j["timed_out"] = true;
    if (o.rolled_back) j["rolled_back"] = true;
    if (o.deferred) j["deferred"] = true;
    if (!o.errors.empty()) j["errors"] = o.errors;
    out << j.dump() << "\n";
  };

  RunReport report = engine.run(cfg);
  for (const auto& d : report.diagnostics) std::cerr << "diagnostic: " << d << "\n";

  QueryOptions qo;
  qo.now = TimePoint{clock.load()};
  qo.numeric_time = numeric;
  for (const auto& q : a.queries) {
    std::vector<Substitution> answers;
    try {
      answers = kb.query_text(q, qo);
    } catch (const ParseError& e) {
      throw UsageError("--query '" + q + "': " + e.what());
    }
    json j;
    j["query"] = q;
    j["at"] = now_text();
    json list = json::array();
    for (const auto& s : answers) {
      json b = json::object();
      for (const auto& [var, value] : s.bindings()) b[var] = time_text(value);
      list.push_back(b);
    }
    j["answers"] = list;
    out << j.dump() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string family;
  std::vector<std::size_t> ns;
  std::size_t reps = 5;
  bool serial = false;
  bool csv = false;
};

int cmd_bench(const BenchArgs& a) {
  if (a.family != "eca_basic" && a.family != "ec_basic") throw UsageError("--family must be eca_basic or ec_basic");
  std::vector<std::size_t> ns = a.ns;
  if (ns.empty()) {
    ns = a.family == "eca_basic" ? std::vector<std::size_t>{1000, 2000, 4000} : std::vector<std::size_t>{40, 80, 160};
  }
  for (auto n : ns) {
    if (n == 0) throw UsageError("n must be at least 1");
  }
  EngineOptions eo;
  eo.serial = a.serial;
  std::vector<BenchSample> rows;
  for (auto n : ns) {
    rows.push_back(a.family == "eca_basic" ? bench_eca_basic(n, a.reps, eo) : bench_ec_basic(n, a.reps));
  }
  const char* result_name = a.family == "eca_basic" ? "all_fired" : "holds";
  if (a.csv) {
    std::cout << "n,update_ms,exec_ms,update_ratio,exec_ratio," << result_name << "\n";
  } else {
    std::cout << std::left << std::setw(8) << "n" << std::setw(14) << "update_ms" << std::setw(14) << "exec_ms"
              << std::setw(14) << "update_ratio" << std::setw(12) << "exec_ratio" << result_name << "\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string ur = "-";
    std::string er = "-";
    if (i > 0) {
      std::ostringstream u;
      std::ostringstream e;
      u << std::fixed << std::setprecision(2) << r.update_ms / rows[i - 1].update_ms;
      e << std::fixed << std::setprecision(2) << r.exec_ms / rows[i - 1].exec_ms;
      ur = u.str();
      er = e.str();
    }
    std::ostringstream um;
    std::ostringstream em;
    um << std::fixed << std::setprecision(4) << r.update_ms;
    em << std::fixed << std::setprecision(4) << r.exec_ms;
    if (a.csv) {
      std::cout << r.n << "," << um.str() << "," << em.str() << "," << ur << "," << er << "," << r.result << "\n";
    } else {
      std::cout << std::left << std::setw(8) << r.n << std::setw(14) << um.str() << std::setw(14) << em.str()
                << std::setw(14) << ur << std::setw(12) << er << (r.result ? "true" : "false") << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ConvertArgs {
  std::string input;
  std::string format;
  std::string output;
};

int cmd_convert(const ConvertArgs& a) {
  if (a.format != "text" && a.format != "ecarml") throw UsageError("--format must be text or ecarml");
  std::string text = read_text_file(a.input);
  ruleml::Document doc;
  try {
    doc = ends_with(a.input, ".ecarml") ? ruleml::parse(text) : ruleml::from_clause_text(text);
  } catch (const ParseError& e) {
    throw UsageError(a.input + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what());
  } catch (const ruleml::RuleMLError& e) {
    throw UsageError(a.input + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(a.input + ": unsupported: " + e.what());
  }
  std::string result;
  if (a.format == "ecarml") {
    try {
      result = ruleml::serialize(doc);
    } catch (const ruleml::RuleMLError& e) {
      throw UsageError(a.input + ": unsupported: " + e.what());
    }
  } else {
    result = ruleml::to_clause_text(doc);
  }
  if (a.output.empty()) {
    std::cout << result;
  } else {
    std::ofstream f(a.output, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.output);
    f << result;
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_check(const std::vector<std::string>& files) {
  bool clean = true;
  for (const auto& f : files) {
    std::vector<std::string> problems;
    std::string text;
    try {
      text = read_text_file(f);
    } catch (const std::exception& e) {
      problems.emplace_back(e.what());
    }
    if (problems.empty() && ends_with(f, ".ecarml")) {
      for (const auto& d : ruleml::validate(text)) problems.push_back(d.to_string());
      if (problems.empty()) {
        for (const auto& d : ruleml::validate(ruleml::parse(text))) problems.push_back(d.to_string());
      }
    } else if (problems.empty() && ends_with(f, ".trace")) {
      try {
        parse_trace(text);
      } catch (const ParseError& e) {
        problems.push_back("line " + std::to_string(e.line()) + ": " + e.what());
      }
    } else if (problems.empty()) {
      try {
        for (const auto& t : parse_clauses(text)) {
          if (t.has_functor(":-", 1)) continue;
          Clause c = clause_from_term(t);
          if (c.is_fact() && c.head.is_compound() && c.head.name() == "eca") {
            std::string diag;
            if (!normalize_rule(c.head, diag)) problems.push_back(diag);
          }
        }
      } catch (const ParseError& e) {
        problems.push_back("line " + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what());
      } catch (const std::invalid_argument& e) {
        problems.emplace_back(e.what());
      }
    }
    if (problems.empty()) {
      std::cout << f << ": ok\n";
    } else {
      clean = false;
      for (const auto& p : problems) std::cout << f << ": " << p << "\n";
    }
  }
  return clean ? 0 : 2;
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("bad n list: " + list);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reactlog: complex event detection and ECA rule execution"};
  app.require_subcommand(1);

  DetectArgs detect_args;
  auto* detect_cmd = app.add_subcommand("detect", "detect a complex event over a trace");
  detect_cmd->add_option("--rules", detect_args.rules, "rule files (clause text or .ecarml)");
  detect_cmd->add_option("--trace", detect_args.trace, "trace file")->required();
  detect_cmd->add_option("--expr", detect_args.expr, "event expression, e.g. sequence(a,b)")->required();
  detect_cmd->add_option("--mode", detect_args.mode, "strict or nonstrict");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run the ECA demon over a replayed trace");
  run_cmd->add_option("--rules", run_args.rules, "rule files (clause text or .ecarml)")->required();
  run_cmd->add_option("--trace", run_args.trace, "trace file replayed against the virtual clock");
  run_cmd->add_option("--poll", run_args.poll, "poll span (10s, 250ms, d:h:m:s)");
  run_cmd->add_option("--cycles", run_args.cycles, "cycle cap (0: until quiet)");
  run_cmd->add_flag("--serial", run_args.serial, "evaluate rules one at a time, in order");
  run_cmd->add_option("--start", run_args.start, "virtual clock start (default: first trace record)");
  run_cmd->add_option("--outage", run_args.outages, "FROM/TO window in which WebService.ping fails");
  run_cmd->add_option("--query", run_args.queries, "goal evaluated after the run at the final clock");
  run_cmd->add_option("--report", run_args.report, "write JSONL outcomes here instead of stdout");
  run_cmd->add_option("--mode", run_args.mode, "strict or nonstrict");
  run_cmd->add_option("--timeout-ms", run_args.timeout_ms, "per-rule evaluation timeout");

  BenchArgs bench_args;
  std::string bench_ns;
  auto* bench_cmd = app.add_subcommand("bench", "time the eca_basic / ec_basic test theories");
  bench_cmd->add_option("--family", bench_args.family, "eca_basic or ec_basic")->required();
  bench_cmd->add_option("--n", bench_ns, "comma-separated sizes");
  bench_cmd->add_option("--reps", bench_args.reps, "repetitions (median is reported)");
  bench_cmd->add_flag("--serial", bench_args.serial, "evaluate rules on the demon thread");
  bench_cmd->add_flag("--csv", bench_args.csv, "CSV output");

  ConvertArgs convert_args;
  auto* convert_cmd = app.add_subcommand("convert", "convert between clause text and ECA-RuleML");
  convert_cmd->add_option("input", convert_args.input, "input file (.ecarml or clause text)")->required();
  convert_cmd->add_option("--format", convert_args.format, "text or ecarml")->required();
  convert_cmd->add_option("-o,--output", convert_args.output, "output file (default stdout)");

  std::vector<std::string> check_files;
  auto* check_cmd = app.add_subcommand("check", "validate rule, trace and ECA-RuleML files");
  check_cmd->add_option("files", check_files, "files to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*detect_cmd) return cmd_detect(detect_args);
    if (*run_cmd) return cmd_run(run_args);
    if (*bench_cmd) {
      if (!bench_ns.empty()) bench_args.ns = parse_sizes(bench_ns);
      return cmd_bench(bench_args);
    }
    if (*convert_cmd) return cmd_convert(convert_args);
    if (*check_cmd) return cmd_check(check_files);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
