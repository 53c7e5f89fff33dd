#include "reactlog/bench.hpp"

#include <algorithm>
#include <chrono>

namespace reactlog {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Repeats fn until at least min_ms have elapsed; returns the mean time per call.
template <typename Fn>
double mean_time(Fn&& fn, double min_ms) {
  std::size_t calls = 0;
  auto t0 = Clock::now();
  do {
    fn();
    ++calls;
  } while (ms_since(t0) < min_ms);
  return ms_since(t0) / static_cast<double>(calls);
}

}  // namespace

std::string ec_basic_theory(std::size_t n) {
  std::string out = "initiates(e1, p, T).\nterminates(e2, p, T).\n";
  for (std::size_t i = 1; i <= n; ++i) {
    out += "happens(" + std::string(i % 2 == 1 ? "e1" : "e2") + ", " + std::to_string(i) + ").\n";
  }
  return out;
}

std::string eca_basic_theory(std::size_t n) {
  std::string out;
  out.reserve(n * 12);
  for (std::size_t i = 0; i < n; ++i) out += "eca(_,_,_).\n";
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2;
}

BenchSample bench_eca_basic(std::size_t n, std::size_t reps, const EngineOptions& options) {
  BenchSample out;
  out.n = n;
  out.result = true;
  std::string theory = eca_basic_theory(n);
  std::vector<double> update;
  std::vector<double> exec;
  for (std::size_t r = 0; r < std::max<std::size_t>(reps, 1); ++r) {
    KnowledgeBase kb;
    auto t0 = Clock::now();
    kb.add_text("eca_basic", theory);
    update.push_back(ms_since(t0));
    EcaEngine engine(kb, options);
    RunConfig cfg;
    cfg.cycles = 1;
    cfg.start = TimePoint{0};
    exec.push_back(mean_time(
        [&] {
          auto report = engine.run(cfg);
          std::size_t fired = 0;
          for (const auto& o : report.outcomes) fired += o.fired ? 1 : 0;
          out.result = out.result && fired == n;
        },
        20.0));
  }
  out.update_ms = median(update);
  out.exec_ms = median(exec);
  return out;
}

BenchSample bench_ec_basic(std::size_t n, std::size_t reps) {
  BenchSample out;
  out.n = n;
  std::string theory = ec_basic_theory(n);
  Term goal = Term::compound("holdsAt", {Term::constant("p"), Term::integer(static_cast<std::int64_t>(n) + 1)});
  std::vector<double> update;
  std::vector<double> exec;
  for (std::size_t r = 0; r < std::max<std::size_t>(reps, 1); ++r) {
    KnowledgeBase kb;
    auto t0 = Clock::now();
    kb.add_text("ec_basic", theory);
    update.push_back(ms_since(t0));
    exec.push_back(mean_time([&] { out.result = kb.holds(goal); }, 20.0));
  }
  out.update_ms = median(update);
  out.exec_ms = median(exec);
  return out;
}

}  // namespace reactlog
