#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace reactlog {

/// A point on the linear time line, in integer milliseconds since the UTC epoch.
struct TimePoint {
  std::int64_t millis = 0;

  constexpr TimePoint() = default;
  constexpr explicit TimePoint(std::int64_t ms) : millis(ms) {}

  static constexpr TimePoint min() { return TimePoint{std::numeric_limits<std::int64_t>::min()}; }
  static constexpr TimePoint max() { return TimePoint{std::numeric_limits<std::int64_t>::max()}; }

  constexpr auto operator<=>(const TimePoint&) const = default;
};

/// A closed interval [start, end] with start <= end. Atomic occurrences have start == end.
class TimeInterval {
 public:
  constexpr TimeInterval() = default;
  TimeInterval(TimePoint start, TimePoint end);
  static TimeInterval at(TimePoint t) { return TimeInterval{t, t}; }

  [[nodiscard]] constexpr TimePoint start() const { return start_; }
  [[nodiscard]] constexpr TimePoint end() const { return end_; }
  [[nodiscard]] constexpr bool atomic() const { return start_ == end_; }

  constexpr auto operator<=>(const TimeInterval&) const = default;

 private:
  TimePoint start_{};
  TimePoint end_{};
};

/// A non-negative span of days, hours, minutes and seconds (plus sub-second millis).
struct Timespan {
  std::int64_t days = 0;
  std::int64_t hours = 0;
  std::int64_t minutes = 0;
  std::int64_t seconds = 0;
  std::int64_t millis = 0;

  [[nodiscard]] constexpr std::int64_t total_millis() const {
    return (((days * 24 + hours) * 60 + minutes) * 60 + seconds) * 1000 + millis;
  }
  static Timespan from_millis(std::int64_t total);

  /// Accepts `d:h:m:s` or a single quantity with unit suffix (`250ms`, `10s`, `5m`, `2h`, `1d`).
  static Timespan parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;

  constexpr bool operator==(const Timespan& o) const { return total_millis() == o.total_millis(); }
};

constexpr TimePoint operator+(TimePoint t, const Timespan& s) { return TimePoint{t.millis + s.total_millis()}; }
constexpr TimePoint operator-(TimePoint t, const Timespan& s) { return TimePoint{t.millis - s.total_millis()}; }

/// Whether `between` treats the outer interval's boundaries as inside.
enum class Containment { strict, inclusive };

/// True iff a ends no later than b starts (a precedes or meets b).
bool interval_leq(const TimeInterval& a, const TimeInterval& b);

/// True iff p lies inside outer; strict containment excludes both boundaries.
bool between(const TimeInterval& p, const TimeInterval& outer, Containment mode = Containment::strict);

/// Smallest interval covering every bound of every input. Throws std::invalid_argument on empty input.
TimeInterval hull(std::span<const TimeInterval> intervals);

/// Periodic schedule test: due when never fired or at least one span has passed since the last firing.
bool periodic_due(const Timespan& span, std::optional<TimePoint> last_fire, TimePoint now);

/// ISO 8601 UTC timestamps: `2005-01-01T00:00:01Z`, optional `.mmm` and `+hh:mm` offset.
std::optional<TimePoint> parse_iso8601(std::string_view text);
std::string format_iso8601(TimePoint t);

/// Calendar fields to epoch millis (UTC, proleptic Gregorian).
TimePoint from_civil(int year, int month, int day, int hour, int minute, int second, int millis = 0);

struct CivilTime {
  int year, month, day, hour, minute, second, millis;
};
CivilTime to_civil(TimePoint t);

}  // namespace reactlog
