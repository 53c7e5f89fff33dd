#include <gtest/gtest.h>

#include "oracle/engine_adapter.hpp"

namespace {

class OracleEquivalence : public ::testing::TestWithParam<std::tuple<int, bool>> {};

TEST_P(OracleEquivalence, MatchesBruteForce) {
  auto shapes = oracle::operator_shapes();
  const auto& shape = shapes.at(std::get<0>(GetParam()));
  bool strict = std::get<1>(GetParam());
  std::vector<oracle::Mismatch> bad;
  std::size_t n = oracle::compare_all(shape, strict, 7, 5, bad);
  EXPECT_GT(n, 1000u);
  for (const auto& m : bad) {
    ADD_FAILURE() << m.expr << (m.strict ? " strict" : " non-strict") << " on " << m.eis << "\n  engine: " << m.engine
                  << "\n  oracle: " << m.expected;
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, OracleEquivalence,
                         ::testing::Combine(::testing::Range(0, static_cast<int>(oracle::operator_shapes().size())),
                                            ::testing::Bool()));

}  // namespace
