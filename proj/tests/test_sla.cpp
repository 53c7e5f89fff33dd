#include <gtest/gtest.h>

#include "oracle/sla_oracle.hpp"
#include "support/print.hpp"
#include "support/sla_harness.hpp"
#include "reactlog/temporal.hpp"

using namespace reactlog;

namespace {

constexpr std::int64_t kSecond = 1000, kMinute = 60 * kSecond;
constexpr std::int64_t kPoll = 10 * kSecond;

TimePoint at(int h, int m, int s) { return from_civil(2006, 1, 2, h, m, s); }

using Step = oracle::SlaStep;

std::vector<Step> expected_timeline(TimePoint start, TimePoint t1, TimePoint t2) {
  return oracle::sla_timeline(start.millis, kPoll, t1.millis, t2.millis);
}

int expected_level(const std::vector<Step>& steps, TimePoint t) { return oracle::sla_level(steps, t.millis); }

void check_run(TimePoint start, TimePoint t1, TimePoint t2, std::size_t cycles) {
  auto run = sla::run(start, kPoll, {{t1, t2}}, cycles);
  EXPECT_TRUE(run->errors.empty()) << run->errors.front();
  auto steps = expected_timeline(start, t1, t2);
  for (std::size_t i = 1; i < steps.size(); ++i) {
    TimePoint just_after{steps[i].at + 1}, just_before{steps[i].at - 1};
    EXPECT_EQ(sla::level_at(run->kb, just_after), steps[i].level) << format_iso8601(TimePoint{steps[i].at});
    EXPECT_EQ(sla::level_at(run->kb, just_before), steps[i - 1].level) << format_iso8601(TimePoint{steps[i].at});
  }
  // Sampled between polls over the whole run.
  for (std::int64_t t = start.millis + 5 * kSecond; t < run->end.millis; t += 30 * kSecond)
    EXPECT_EQ(sla::level_at(run->kb, TimePoint{t}), expected_level(steps, TimePoint{t})) << format_iso8601(TimePoint{t});
}

TEST(Sla, FullEscalationAndRestart) {
  TimePoint start = at(9, 0, 0);
  TimePoint t1 = at(9, 0, 35), t2 = at(9, 20, 5);
  auto steps = expected_timeline(start, t1, t2);
  ASSERT_EQ(steps.size(), 5u);
  EXPECT_EQ(steps[1].at, at(9, 0, 40).millis);
  EXPECT_EQ(steps[2].at, at(9, 5, 40).millis);
  EXPECT_EQ(steps[3].at, at(9, 15, 40).millis);
  EXPECT_EQ(steps[4].at, at(9, 20, 10).millis);
  check_run(start, t1, t2, 130);
}

TEST(Sla, ShortOutageOnlyReachesLevelOne) {
  TimePoint start = at(10, 0, 0);
  check_run(start, at(10, 1, 1), at(10, 3, 0), 30);
}

TEST(Sla, OutageEndingBetweenDeadlines) {
  TimePoint start = at(11, 0, 0);
  check_run(start, at(11, 0, 10), at(11, 8, 0), 60);
}

TEST(Sla, NotificationsGoToTheResponsibleRole) {
  auto run = sla::run(at(9, 0, 0), kPoll, {{at(9, 0, 35), at(9, 20, 5)}}, 130);
  ASSERT_EQ(run->notes.size(), 2u);
  EXPECT_EQ(run->notes[0].at, at(9, 0, 40));
  EXPECT_EQ(run->notes[0].role, "process_manager");
  EXPECT_EQ(run->notes[1].at, at(9, 20, 10));
  EXPECT_EQ(run->notes[1].role, "control_committee");
  EXPECT_NE(run->notes[1].what.find("restart"), std::string::npos);
}

TEST(Sla, NoOutageStaysAtLevelZero) {
  auto run = sla::run(at(9, 0, 0), kPoll, {}, 20);
  EXPECT_TRUE(run->notes.empty());
  for (int s = 5; s < 200; s += 20) EXPECT_EQ(sla::level_at(run->kb, at(9, 0, s)), 0);
}

TEST(Sla, DerivedObligationAndCancelPermission) {
  auto run = sla::run(at(9, 0, 0), kPoll, {{at(9, 0, 35), at(9, 20, 5)}}, 130);
  auto holds = [&](const char* f, TimePoint t) {
    return !run->kb.query(Term::compound("holdsAt", {parse_term(f), Term::datetime(t)})).empty();
  };
  EXPECT_FALSE(holds("oblige(process_manager, S, restart(S))", at(9, 0, 30)));
  EXPECT_TRUE(holds("oblige(process_manager, S, restart(S))", at(9, 1, 0)));
  EXPECT_FALSE(holds("permit(service_consumer, contract, cancel)", at(9, 10, 0)));
  EXPECT_TRUE(holds("permit(service_consumer, contract, cancel)", at(9, 16, 0)));
  EXPECT_FALSE(holds("permit(service_consumer, contract, cancel)", at(9, 21, 0)));
}

}  // namespace
