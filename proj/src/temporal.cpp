#include "reactlog/temporal.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace reactlog {

TimeInterval::TimeInterval(TimePoint start, TimePoint end) : start_(start), end_(end) {
  if (end < start) {
    throw std::invalid_argument("time interval ends before it starts");
  }
}

Timespan Timespan::from_millis(std::int64_t total) {
  if (total < 0) throw std::invalid_argument("negative timespan");
  Timespan s;
  s.millis = total % 1000;
  total /= 1000;
  s.seconds = total % 60;
  total /= 60;
  s.minutes = total % 60;
  total /= 60;
  s.hours = total % 24;
  s.days = total / 24;
  return s;
}

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Timespan Timespan::parse(std::string_view text) {
  if (text.find(':') != std::string_view::npos) {
    std::int64_t parts[4];
    std::size_t n = 0;
    while (n < 4) {
      auto pos = text.find(':');
      auto field = text.substr(0, pos);
      auto v = parse_int(field);
      if (!v || *v < 0) throw std::invalid_argument("bad timespan field: " + std::string(field));
      parts[n++] = *v;
      if (pos == std::string_view::npos) break;
      text.remove_prefix(pos + 1);
    }
    if (n != 4) throw std::invalid_argument("timespan must have the form d:h:m:s");
    return Timespan{parts[0], parts[1], parts[2], parts[3], 0};
  }
  std::size_t digits = 0;
  while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) ++digits;
  auto v = parse_int(text.substr(0, digits));
  if (!v) throw std::invalid_argument("bad timespan: " + std::string(text));
  auto unit = text.substr(digits);
  if (unit == "ms") return from_millis(*v);
  if (unit == "s" || unit.empty()) return from_millis(*v * 1000);
  if (unit == "m") return from_millis(*v * 60'000);
  if (unit == "h") return from_millis(*v * 3'600'000);
  if (unit == "d") return from_millis(*v * 86'400'000);
  throw std::invalid_argument("unknown timespan unit: " + std::string(unit));
}

std::string Timespan::to_string() const {
  std::string out = std::to_string(days) + ":" + std::to_string(hours) + ":" + std::to_string(minutes) + ":" +
                    std::to_string(seconds);
  if (millis != 0) out += "." + std::to_string(millis);
  return out;
}

bool interval_leq(const TimeInterval& a, const TimeInterval& b) { return a.end() <= b.start(); }

bool between(const TimeInterval& p, const TimeInterval& outer, Containment mode) {
  if (mode == Containment::inclusive) return outer.start() <= p.start() && p.end() <= outer.end();
  return outer.start() < p.start() && p.end() < outer.end();
}

TimeInterval hull(std::span<const TimeInterval> intervals) {
  if (intervals.empty()) throw std::invalid_argument("hull of an empty interval list");
  TimePoint lo = intervals.front().start();
  TimePoint hi = intervals.front().end();
  for (const auto& i : intervals) {
    lo = std::min(lo, i.start());
    hi = std::max(hi, i.end());
  }
  return TimeInterval{lo, hi};
}

bool periodic_due(const Timespan& span, std::optional<TimePoint> last_fire, TimePoint now) {
  if (!last_fire) return true;
  return now.millis - last_fire->millis >= span.total_millis();
}

// Howard Hinnant's days_from_civil / civil_from_days.
namespace {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

TimePoint from_civil(int year, int month, int day, int hour, int minute, int second, int millis) {
  std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  std::int64_t secs = ((days * 24 + hour) * 60 + minute) * 60 + second;
  return TimePoint{secs * 1000 + millis};
}

CivilTime to_civil(TimePoint t) {
  std::int64_t ms = t.millis;
  std::int64_t days = floor_div(ms, 86'400'000);
  std::int64_t rem = ms - days * 86'400'000;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  CivilTime c{};
  c.year = static_cast<int>(y);
  c.month = static_cast<int>(m);
  c.day = static_cast<int>(d);
  c.hour = static_cast<int>(rem / 3'600'000);
  c.minute = static_cast<int>(rem / 60'000 % 60);
  c.second = static_cast<int>(rem / 1000 % 60);
  c.millis = static_cast<int>(rem % 1000);
  return c;
}

std::optional<TimePoint> parse_iso8601(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff](Z|+hh:mm|-hh:mm)?
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't') || s[13] != ':' ||
      s[16] != ':') {
    return std::nullopt;
  }
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), se = num(17, 2);
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  if (*mo < 1 || *mo > 12 || *d < 1 || *d > 31 || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;
  std::size_t pos = 19;
  int ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (digits < 3) ms = ms * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) ms *= 10;
  }
  std::int64_t offset_ms = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int sign = s[pos] == '+' ? 1 : -1;
      auto oh = num(pos + 1, 2);
      auto om = num(pos + 4, 2);
      if (!oh || !om || pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
      offset_ms = sign * ((*oh * 60 + *om) * 60'000LL);
      pos += 6;
    }
  }
  if (pos != s.size()) return std::nullopt;
  TimePoint t = from_civil(*y, *mo, *d, *h, *mi, *se, ms);
  return TimePoint{t.millis - offset_ms};
}

std::string format_iso8601(TimePoint t) {
  CivilTime c = to_civil(t);
  char buf[40];
  if (c.millis != 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", c.year, c.month, c.day, c.hour, c.minute,
                  c.second, c.millis);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day, c.hour, c.minute,
                  c.second);
  }
  return buf;
}

}  // namespace reactlog
