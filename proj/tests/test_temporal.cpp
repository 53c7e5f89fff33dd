#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/print.hpp"
#include "reactlog/temporal.hpp"

using namespace reactlog;

namespace {

TimeInterval I(std::int64_t a, std::int64_t b) { return TimeInterval{TimePoint{a}, TimePoint{b}}; }

TEST(IntervalLeq, EndBeforeStart) {
  EXPECT_TRUE(interval_leq(I(1, 2), I(2, 5)));
  EXPECT_FALSE(interval_leq(I(1, 5), I(3, 7)));
  EXPECT_TRUE(interval_leq(I(1, 1), I(1, 1)));
}

TEST(Between, StrictContainment) {
  EXPECT_TRUE(between(I(2, 2), I(1, 3)));
  EXPECT_FALSE(between(I(1, 1), I(1, 3)));
  EXPECT_FALSE(between(I(2, 4), I(1, 3)));
  EXPECT_TRUE(between(I(1, 1), I(1, 3), Containment::inclusive));
}

TEST(Hull, MinMaxOfBounds) {
  std::vector<TimeInterval> v{I(1, 1), I(5, 5)};
  EXPECT_EQ(hull(v), I(1, 5));
  v = {I(3, 4)};
  EXPECT_EQ(hull(v), I(3, 4));
  v = {I(2, 6), I(1, 3)};
  EXPECT_EQ(hull(v), I(1, 6));
  EXPECT_THROW(hull(std::vector<TimeInterval>{}), std::invalid_argument);
}

TEST(Hull, PermutationInvariantAndIdempotent) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(0, 50);
  for (int k = 0; k < 200; ++k) {
    std::vector<TimeInterval> v;
    for (int i = 0; i < 5; ++i) {
      int a = d(rng), b = d(rng);
      v.push_back(I(std::min(a, b), std::max(a, b)));
    }
    TimeInterval h = hull(v);
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(hull(v), h);
    v.push_back(h);
    EXPECT_EQ(hull(v), h);
  }
}

TEST(IntervalLeq, TransitiveOnAtomicIntervals) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        if (interval_leq(I(a, a), I(b, b)) && interval_leq(I(b, b), I(c, c))) EXPECT_TRUE(interval_leq(I(a, a), I(c, c)));
}

TEST(TimeInterval, RejectsReversedBounds) { EXPECT_THROW(I(5, 1), std::invalid_argument); }

TEST(PeriodicDue, BoundaryInclusive) {
  Timespan ten = Timespan::from_millis(10'000);
  TimePoint t{1'000'000};
  EXPECT_TRUE(periodic_due(ten, std::nullopt, t));
  EXPECT_FALSE(periodic_due(ten, t, t + Timespan::from_millis(9'000)));
  EXPECT_TRUE(periodic_due(ten, t, t + ten));
}

TEST(Timespan, ParseAndFormat) {
  Timespan s = Timespan::parse("0:0:1:30");
  EXPECT_EQ(s.total_millis(), 90'000);
  EXPECT_EQ(Timespan::parse(s.to_string()), s);
  EXPECT_THROW(Timespan::parse("1:2"), std::invalid_argument);
}

TEST(Iso8601, RoundTripAndCivil) {
  auto t = parse_iso8601("2005-01-01T00:00:10Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(*t, from_civil(2005, 1, 1, 0, 0, 10));
  EXPECT_EQ(format_iso8601(*t), "2005-01-01T00:00:10Z");
  EXPECT_EQ(t->millis, 1104537610000LL);
  auto c = to_civil(*t);
  EXPECT_EQ(c.year, 2005);
  EXPECT_EQ(c.second, 10);
  EXPECT_EQ(from_civil(2000, 3, 1, 0, 0, 0).millis - from_civil(2000, 2, 28, 0, 0, 0).millis, 2 * 86'400'000LL);
  EXPECT_FALSE(parse_iso8601("2005-13-01T00:00:00Z"));
  EXPECT_FALSE(parse_iso8601("yesterday"));
}

}  // namespace
