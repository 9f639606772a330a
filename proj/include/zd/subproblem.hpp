#pragma once

// Continuous dispatch for a fixed zone assignment: each unit is confined to
// one zone (intersected with its ramp window), and the remaining problem is
// the non-convex NLP with Kron losses, valve ripple and spinning reserve.

#include <cstdint>
#include <span>
#include <vector>

#include "zd/error.hpp"
#include "zd/model.hpp"

namespace zd {

/// Serial runs are the reference; parallel runs must reproduce them bit for bit.
enum class Execution { Serial, Parallel };

struct SolveOptions {
  double balance_tol = 1e-4;  // MW
  int n_starts = 0;           // 0: 8 for valve-free cases, 64 otherwise
  int max_iter = 20000;       // pair moves per start
  std::uint64_t rng_seed = 7;
  double gap_tol = 1e-7;      // $/MWh, first-order stationarity
  double improve_tol = 1e-9;  // $/h, smallest accepted move
  int probe_passes = 30;      // all-pairs sweeps per start (non-convex cases)
  Execution execution = Execution::Parallel;
  bool allow_exact = true;    // use the lambda method when it applies

  int resolved_starts(bool nonconvex) const noexcept {
    return n_starts > 0 ? n_starts : (nonconvex ? 64 : 8);
  }
};

struct SubproblemResult {
  std::vector<double> p;
  double cost = 0.0;
  double loss_mw = 0.0;
  double balance_residual = 0.0;  // |sum p - demand - loss|
  double reserve = 0.0;           // sum of reserve_available
  bool converged = false;
  int starts_used = 0;
  int starts_feasible = 0;
  int best_start = -1;
  long iterations = 0;
};

/// Raised when every start hit the iteration cap. Carries the best iterate.
class NotConvergedError : public DispatchError {
 public:
  NotConvergedError(const std::string& what, SubproblemResult best)
      : DispatchError(ErrorKind::NotConverged, what), best_(std::move(best)) {}
  const SubproblemResult& best() const noexcept { return best_; }

 private:
  SubproblemResult best_;
};

/// min(p_max - p, reserve_cap).
double reserve_available(const Unit& unit, double p) noexcept;
double total_reserve(std::span<const Unit> units, std::span<const double> p);

struct Bounds {
  std::vector<double> lb;
  std::vector<double> ub;
};

/// Effective bounds of every unit under the assignment. Throws Infeasible if
/// an assigned zone is unreachable within the ramp window.
Bounds assignment_bounds(const SystemCase& sc, const ZoneAssignment& assignment);

struct LambdaDispatch {
  std::vector<double> p;
  double lambda = 0.0;  // marginal price, $/MWh
  double cost = 0.0;    // quadratic part only
};

/// Equal-incremental-cost dispatch of the quadratic costs over the box
/// [lb, ub] meeting `demand` exactly. With `at_least`, generation may exceed
/// demand when that is cheaper. Valve terms and losses are ignored.
/// Throws Infeasible when the box cannot meet demand.
LambdaDispatch lambda_dispatch(std::span<const Unit> units, std::span<const double> lb,
                               std::span<const double> ub, double demand, bool at_least = false);

/// Exact solution of the valve-free, loss-free case for one assignment.
SubproblemResult solve_lossless_quadratic(const SystemCase& sc, const ZoneAssignment& assignment);
SubproblemResult solve_lossless_quadratic(const SystemCase& sc, const Bounds& bounds);

/// Multi-start local solve of the full subproblem. Returns the cheapest
/// converged local minimum (ties go to the lowest start index).
SubproblemResult solve_nlp(const SystemCase& sc, const ZoneAssignment& assignment,
                           const SolveOptions& opts = {});
SubproblemResult solve_nlp(const SystemCase& sc, const Bounds& bounds, const SolveOptions& opts = {});

}  // namespace zd
