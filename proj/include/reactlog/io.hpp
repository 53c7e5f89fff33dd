#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "reactlog/kb.hpp"

namespace reactlog {

/// One line of an event trace: `<time> <occurs|happens> <term-text>`.
///
/// The time is an ISO 8601 timestamp or a plain integer; a trace must use
/// one form throughout. Integer times are read as milliseconds and stored as
/// integer time terms.
struct TraceRecord {
  enum class Kind { occurs, happens };
  TimePoint at;
  Kind kind = Kind::occurs;
  Term event;
  /// 1-based source line.
  int line = 0;
};

struct Trace {
  std::vector<TraceRecord> records;  // sorted by time, stable
  bool numeric_time = false;
};

/// Blank lines and `%` / `#` comments are skipped. Throws ParseError.
Trace parse_trace(std::string_view text);
Trace read_trace_file(const std::string& path);

/// Stores one record: occurs under `eis(<event>)`, happens under `trace`.
Receipt apply_record(KnowledgeBase& kb, const TraceRecord& r, bool numeric_time);

/// Loads a rule file into the kb under its path as update id. `.ecarml` files
/// are read as ECA-RuleML, anything else as clause text.
Receipt load_program(KnowledgeBase& kb, const std::string& path);

std::string read_text_file(const std::string& path);

/// Time term as text: integers as numbers, datetimes in ISO 8601.
std::string time_text(const Term& t);

}  // namespace reactlog
