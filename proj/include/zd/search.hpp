#pragma once

// Discrete layer: choose one feasible zone per unit. Small assignment spaces
// are enumerated outright; larger ones go through best-first branch and bound
// with a valve-free, loss-free lambda-dispatch lower bound.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zd/model.hpp"
#include "zd/subproblem.hpp"

namespace zd {

struct SearchOptions {
  SolveOptions nlp;
  std::uint64_t enum_threshold = 4096;  // raw product of zone counts
  bool pruning = true;
  Execution execution = Execution::Parallel;
};

struct IncumbentUpdate {
  double cost = 0.0;
  double time_s = 0.0;
};

struct SearchStats {
  std::string path;                         // "enumeration" or "branch_and_bound"
  std::uint64_t assignments_total = 0;      // product of zone counts, saturating
  std::uint64_t assignments_reachable = 0;  // product of reachable zone counts, saturating
  std::uint64_t assignments_solved = 0;
  std::uint64_t assignments_infeasible = 0;
  std::uint64_t nodes_created = 0;
  std::uint64_t nodes_pruned = 0;          // by bound
  std::uint64_t nodes_infeasible = 0;      // bound problem had no solution
  std::vector<double> pruned_bounds;       // lower bounds of nodes pruned by bound
  std::vector<IncumbentUpdate> incumbent_history;
  std::vector<std::string> diagnostics;    // bound self-check failures, unconverged leaves
  bool pruning_disabled = false;
};

struct DispatchSolution {
  std::vector<double> p;
  ZoneAssignment assignment;
  double loss_mw = 0.0;
  double cost = 0.0;
  std::vector<double> reserve;  // per unit
  double balance_residual = 0.0;
  double solve_time_s = 0.0;
  bool converged = true;
  int starts_used = 0;
  SearchStats stats;
};

/// Lexicographic walk over reachable zones (last unit varies fastest).
class AssignmentEnumerator {
 public:
  explicit AssignmentEnumerator(const SystemCase& sc);

  /// Writes the next assignment; false once the space is exhausted.
  bool next(ZoneAssignment& out);
  std::uint64_t size() const noexcept { return size_; }

 private:
  std::vector<std::vector<int>> choices_;
  std::vector<std::size_t> cursor_;
  std::uint64_t size_ = 0;
  bool started_ = false;
  bool done_ = false;
};

std::vector<ZoneAssignment> enumerate_assignments(const SystemCase& sc);

/// Product of zone counts, ignoring ramps. Saturates at UINT64_MAX.
std::uint64_t assignment_space_size(const SystemCase& sc);
/// Product of ramp-reachable zone counts. Saturates at UINT64_MAX.
std::uint64_t reachable_assignment_count(const SystemCase& sc);

/// Cost of the quadratic dispatch where unit i is held to zone partial[i]
/// (intersected with its ramp window) or, for partial[i] < 0, to the hull of
/// its reachable zones. With a loss model, generation may exceed demand.
/// Throws Infeasible when no completion can meet demand.
double lower_bound(const SystemCase& sc, std::span<const int> partial);

DispatchSolution enumerate_and_solve(const SystemCase& sc, const SearchOptions& opts = {});
DispatchSolution branch_and_bound(const SystemCase& sc, const SearchOptions& opts = {});

/// Enumeration when the raw product is within opts.enum_threshold, branch and
/// bound otherwise. Throws Infeasible when no assignment is feasible.
DispatchSolution solve(const SystemCase& sc, const SearchOptions& opts = {});

}  // namespace zd
