// Serial reference vs OpenMP kernels: loss evaluation, multi-start NLP and
// zone enumeration. Prints best-of-k wall time and the speedup.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include "zd/case_io.hpp"
#include "zd/loss.hpp"
#include "zd/parallel.hpp"
#include "zd/search.hpp"

using namespace zd;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel, bool same) {
  std::printf("%-28s %10.4f %10.4f %8.2fx  %s\n", name.c_str(), serial, parallel, serial / parallel,
              same ? "identical" : "DIFFERS");
}

SystemCase load(const std::string& name) { return load_case(std::string(ZD_DATA_DIR) + "/cases/" + name + ".case"); }

}  // namespace

int main() {
  apply_thread_limit_from_env();
  std::printf("threads: %d\n", max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  {
    const std::size_t n = 2000;
    LossModel lm;
    lm.n = n;
    lm.B.assign(n * n, 0.0);
    lm.B0.assign(n, 0.0);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1e-5, 1e-5);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) lm.B[i * n + j] = lm.B[j * n + i] = i == j ? 1e-4 : u(gen);
    }
    std::vector<double> p(n);
    for (auto& v : p) v = std::uniform_real_distribution<double>(50, 400)(gen);
    double a = 0, b = 0;
    const double ts = best_of(20, [&] { a = transmission_loss_serial(lm, p); });
    const double tp = best_of(20, [&] { b = transmission_loss(lm, p); });
    row("loss n=2000", ts, tp, std::abs(a - b) <= 1e-12 * std::abs(a));
  }

  {
    const SystemCase sc = load("15unit_valve");
    const ZoneAssignment za{{0, 2, 0, 0, 0, 3, 0, 0, 0, 0, 0, 1, 0, 0, 0}};
    SolveOptions so;
    so.n_starts = 64;
    so.execution = Execution::Serial;
    SubproblemResult a, b;
    const double ts = best_of(3, [&] { a = solve_nlp(sc, za, so); });
    so.execution = Execution::Parallel;
    const double tp = best_of(3, [&] { b = solve_nlp(sc, za, so); });
    row("solve_nlp 15-valve 64 starts", ts, tp, a.p == b.p);
  }

  {
    const SystemCase sc = load("6unit");
    SearchOptions serial;
    serial.execution = Execution::Serial;
    serial.nlp.execution = Execution::Serial;
    DispatchSolution a, b;
    const double ts = best_of(3, [&] { a = enumerate_and_solve(sc, serial); });
    const double tp = best_of(3, [&] { b = enumerate_and_solve(sc); });
    row("enumeration 6-unit", ts, tp, a.p == b.p);
  }
  return 0;
}
