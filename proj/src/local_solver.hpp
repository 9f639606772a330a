#pragma once

// Single-start local solver for the fixed-assignment subproblem.
//
// Moves are pairwise exchanges: unit i moves by t and a partner j absorbs the
// change so that balance (including the Kron loss) stays exact. The partner's
// output is the root of a scalar quadratic, so every trial point is feasible
// with respect to balance and the line search along the exchange can be done
// exactly, piece by piece, between kinks, ripple peaks and reserve breakpoints.

#include <optional>
#include <vector>

#include "zd/model.hpp"
#include "zd/subproblem.hpp"

namespace zd::detail {

/// Kron loss in MW units: P_L = p'Mp + B0'p + K, with M = B / base.
struct LossKernel {
  std::size_t n = 0;
  bool active = false;
  std::vector<double> m;
  std::vector<double> b0;
  double k = 0.0;

  explicit LossKernel(const SystemCase& sc);
  double mij(std::size_t i, std::size_t j) const noexcept { return m[i * n + j]; }
};

/// Output of unit j as a function of unit i with everyone else frozen, and
/// the inverse map.
struct PairLine {
  double bii = 0.0, bjj = 0.0, bij = 0.0;
  double ui = 0.0, uj = 0.0;
  double k = 0.0;

  double partner_of_i(double xi) const noexcept;
  double partner_of_j(double xj) const noexcept;
  double dxj_dxi(double xi, double xj) const noexcept;
};

class LocalSolver {
 public:
  LocalSolver(const SystemCase& sc, const Bounds& bounds, const SolveOptions& opts, const LossKernel& kernel);

  std::vector<double> warm_start() const;
  std::vector<double> random_start(int k) const;

  /// Runs one start to a local minimum. Returns nullopt if balance or reserve
  /// cannot be restored from this start.
  std::optional<SubproblemResult> run(std::vector<double> p0);

 private:
  struct Move {
    double t = 0.0;
    double gain = 0.0;
  };

  void refresh();
  void shift(std::size_t i, double delta);
  double residual() const noexcept { return demand_ + loss_ - sum_; }
  double delta_loss_dp(std::size_t i) const noexcept;
  PairLine pair_line(std::size_t i, std::size_t j) const noexcept;
  double reserve_of(std::size_t i, double x) const noexcept;

  std::optional<Move> search_pair(std::size_t i, std::size_t j, bool two_sided);
  void apply(std::size_t i, std::size_t j, double t);
  bool descend();
  bool probe();
  bool restore_balance();
  bool polish_balance();
  bool repair_reserve();

  const SystemCase& sc_;
  const Bounds& bounds_;
  const SolveOptions& opts_;
  const LossKernel& kernel_;
  std::size_t n_;
  double demand_;
  bool reserve_active_;
  bool nonconvex_;

  std::vector<double> p_;
  std::vector<double> q_;  // M p
  double loss_ = 0.0;
  double sum_ = 0.0;
  long iters_ = 0;
  long moves_since_refresh_ = 0;
};

}  // namespace zd::detail
