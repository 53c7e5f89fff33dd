#include "reactlog/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "reactlog/ruleml.hpp"
#include "reactlog/syntax.hpp"

namespace reactlog {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trace parse_trace(std::string_view text) {
  Trace trace;
  bool seen_iso = false;
  bool seen_int = false;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '%' || line[b] == '#') continue;
    std::istringstream fields(line.substr(b));
    std::string when;
    std::string kind;
    fields >> when >> kind;
    std::string rest;
    std::getline(fields, rest);
    if (kind.empty() || rest.find_first_not_of(" \t\r") == std::string::npos) {
      throw ParseError("expected '<time> <occurs|happens> <term>'", line_no, 1);
    }
    TraceRecord r;
    r.line = line_no;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(when.data(), when.data() + when.size(), v);
    if (ec == std::errc{} && p == when.data() + when.size()) {
      r.at = TimePoint{v};
      seen_int = true;
    } else if (auto tp = parse_iso8601(when)) {
      r.at = *tp;
      seen_iso = true;
    } else {
      throw ParseError("bad timestamp '" + when + "'", line_no, 1);
    }
    if (kind == "occurs") {
      r.kind = TraceRecord::Kind::occurs;
    } else if (kind == "happens") {
      r.kind = TraceRecord::Kind::happens;
    } else {
      throw ParseError("unknown record kind '" + kind + "'", line_no, static_cast<int>(when.size()) + 2);
    }
    try {
      r.event = parse_term(rest);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no, e.column());
    }
    if (seen_iso && seen_int) throw ParseError("trace mixes ISO 8601 and integer times", line_no, 1);
    trace.records.push_back(std::move(r));
  }
  trace.numeric_time = seen_int;
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.at < b.at; });
  return trace;
}

Trace read_trace_file(const std::string& path) { return parse_trace(read_text_file(path)); }

Receipt apply_record(KnowledgeBase& kb, const TraceRecord& r, bool numeric_time) {
  Term t = numeric_time ? Term::integer(r.at.millis) : Term::datetime(r.at);
  if (r.kind == TraceRecord::Kind::occurs) {
    return kb.add_update(update_key(Term::compound("eis", {r.event})),
                         {Clause{Term::compound("occurs", {r.event, t}), {}}});
  }
  return kb.add_update("trace", {Clause{Term::compound("happens", {r.event, t}), {}}});
}

Receipt load_program(KnowledgeBase& kb, const std::string& path) {
  std::string text = read_text_file(path);
  if (path.size() >= 7 && path.compare(path.size() - 7, 7, ".ecarml") == 0) {
    auto doc = ruleml::parse(text);
    std::vector<Clause> clauses;
    for (const auto& r : doc.eca_rules) clauses.push_back(Clause{r.to_term(!r.oid.empty()), {}});
    for (const auto& c : doc.clauses) clauses.push_back(c);
    return kb.add_update(path, std::move(clauses));
  }
  return kb.add_text(path, text);
}

std::string time_text(const Term& t) {
  if (t.is_literal()) {
    if (const auto* tp = std::get_if<TimePoint>(&t.value())) return format_iso8601(*tp);
  }
  return write_term(t);
}

}  // namespace reactlog
