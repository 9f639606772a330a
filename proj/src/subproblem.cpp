#include "zd/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "local_solver.hpp"
#include "zd/cost.hpp"
#include "zd/loss.hpp"

namespace zd {

double reserve_available(const Unit& unit, double p) noexcept {
  return std::min(unit.p_max - p, unit.reserve_cap);
}

double total_reserve(std::span<const Unit> units, std::span<const double> p) {
  if (units.size() != p.size()) throw DispatchError(ErrorKind::DimensionMismatch, "reserve: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) s += reserve_available(units[i], p[i]);
  return s;
}

Bounds assignment_bounds(const SystemCase& sc, const ZoneAssignment& assignment) {
  const std::size_t n = sc.size();
  if (assignment.zone_index.size() != n) {
    throw DispatchError(ErrorKind::DimensionMismatch, "assignment size does not match unit count");
  }
  Bounds b;
  b.lb.resize(n);
  b.ub.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Unit& u = sc.units[i];
    const int k = assignment.zone_index[i];
    if (k < 0 || k >= u.zone_count()) {
      throw DispatchError(ErrorKind::Infeasible, "unit '" + u.id + "': zone index out of range");
    }
    const Interval iv = effective_bounds(u, k);
    if (iv.empty()) {
      std::ostringstream os;
      os << "unit '" << u.id << "': zone " << k << " unreachable within ramp window";
      throw DispatchError(ErrorKind::Infeasible, os.str());
    }
    b.lb[i] = iv.lb;
    b.ub[i] = iv.ub;
  }
  return b;
}

SubproblemResult solve_lossless_quadratic(const SystemCase& sc, const ZoneAssignment& assignment) {
  return solve_lossless_quadratic(sc, assignment_bounds(sc, assignment));
}

SubproblemResult solve_lossless_quadratic(const SystemCase& sc, const Bounds& bounds) {
  if (sc.loss || sc.has_valve()) {
    throw std::invalid_argument("solve_lossless_quadratic needs a loss-free, valve-free case");
  }
  const LambdaDispatch ld = lambda_dispatch(sc.units, bounds.lb, bounds.ub, sc.demand);
  SubproblemResult r;
  r.p = ld.p;
  r.cost = ld.cost;
  double sum = 0.0;
  for (double v : r.p) sum += v;
  r.balance_residual = std::abs(sum - sc.demand);
  r.reserve = total_reserve(sc.units, r.p);
  r.converged = true;
  r.starts_used = 1;
  r.starts_feasible = 1;
  r.best_start = 0;
  return r;
}

SubproblemResult solve_nlp(const SystemCase& sc, const ZoneAssignment& assignment, const SolveOptions& opts) {
  return solve_nlp(sc, assignment_bounds(sc, assignment), opts);
}

SubproblemResult solve_nlp(const SystemCase& sc, const Bounds& bounds, const SolveOptions& opts) {
  if (!(opts.balance_tol > 0.0)) throw std::invalid_argument("balance_tol must be positive");

  // The exact method covers this case unless reserve cuts into the box.
  if (opts.allow_exact && !sc.loss && !sc.has_valve()) {
    SubproblemResult r = solve_lossless_quadratic(sc, bounds);
    if (sc.reserve_req <= 0.0 || r.reserve >= sc.reserve_req - 1e-9) return r;
  }

  const bool nonconvex = sc.has_valve();
  const int n_starts = opts.resolved_starts(nonconvex);
  const detail::LossKernel kernel(sc);
  std::vector<std::optional<SubproblemResult>> results(static_cast<std::size_t>(n_starts));

  auto run_start = [&](int k) {
    detail::LocalSolver solver(sc, bounds, opts, kernel);
    auto p0 = k == 0 ? solver.warm_start() : solver.random_start(k);
    results[static_cast<std::size_t>(k)] = solver.run(std::move(p0));
  };

  if (opts.execution == Execution::Parallel && n_starts > 1) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n_starts; ++k) run_start(k);
  } else {
    for (int k = 0; k < n_starts; ++k) run_start(k);
  }

  // Ordered reduction: lowest cost, then lowest start index.
  int best = -1;
  int best_any = -1;
  int feasible = 0;
  long iterations = 0;
  for (int k = 0; k < n_starts; ++k) {
    const auto& r = results[static_cast<std::size_t>(k)];
    if (!r) continue;
    ++feasible;
    iterations += r->iterations;
    if (best_any < 0 || r->cost < results[static_cast<std::size_t>(best_any)]->cost) best_any = k;
    if (r->converged && (best < 0 || r->cost < results[static_cast<std::size_t>(best)]->cost)) best = k;
  }
  if (feasible == 0) {
    throw DispatchError(ErrorKind::Infeasible, "no start satisfied balance and reserve within bounds");
  }
  const int pick = best >= 0 ? best : best_any;
  SubproblemResult out = *results[static_cast<std::size_t>(pick)];
  out.starts_used = n_starts;
  out.starts_feasible = feasible;
  out.best_start = pick;
  out.iterations = iterations;
  if (best < 0) {
    throw NotConvergedError("iteration cap hit on every start", std::move(out));
  }
  return out;
}

}  // namespace zd
