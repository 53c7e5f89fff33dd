#pragma once

#include <string>
#include <vector>

#include "reactlog/eca_engine.hpp"

namespace reactlog {

/// n happens facts alternating e1/e2 at times 1..n, plus
/// `initiates(e1,p,T)` and `terminates(e2,p,T)`.
std::string ec_basic_theory(std::size_t n);
/// n rules `eca(_,_,_)`.
std::string eca_basic_theory(std::size_t n);

struct BenchSample {
  std::size_t n = 0;
  /// Median time to load the theory into a fresh knowledge base.
  double update_ms = 0;
  /// Median execution time: one demon cycle (eca_basic) or one
  /// `holdsAt(p, n+1)` decision (ec_basic).
  double exec_ms = 0;
  /// ec_basic: the decided holdsAt value; eca_basic: every rule fired.
  bool result = false;
};

BenchSample bench_eca_basic(std::size_t n, std::size_t reps, const EngineOptions& options = {});
BenchSample bench_ec_basic(std::size_t n, std::size_t reps);

double median(std::vector<double> v);

}  // namespace reactlog
