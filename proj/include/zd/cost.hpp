#pragma once

// Generation cost: quadratic plus rectified-sine valve-point ripple.

#include <span>
#include <vector>

#include "zd/model.hpp"

namespace zd {

struct CostBreakdown {
  double quadratic = 0.0;
  double valve = 0.0;
  double total = 0.0;
};

double quadratic_cost(const Unit& unit, double p) noexcept;

/// Quadratic cost plus |e sin(f (p - p_min))|. The sine is anchored at the
/// unit's global p_min, not at the lower bound of the zone in use.
CostBreakdown valve_cost(const Unit& unit, double p) noexcept;

inline double unit_cost(const Unit& unit, double p) noexcept { return valve_cost(unit, p).total; }

double total_cost(std::span<const Unit> units, std::span<const double> p);

/// Non-differentiable points of the valve term strictly inside (lb, ub),
/// ascending. Empty when the unit has no valve term.
std::vector<double> kink_points(const Unit& unit, Interval interval);

/// Midpoints between kinks (maxima of |sin|) strictly inside (lb, ub).
std::vector<double> ripple_peaks(const Unit& unit, Interval interval);

struct OneSided {
  double left = 0.0;
  double right = 0.0;

  bool is_kink() const noexcept { return left != right; }
};

/// dF/dp. Between kinks both sides agree; at a kink (|sin| below 1e-10) the
/// left and right limits are returned separately.
OneSided smooth_piece_derivative(const Unit& unit, double p) noexcept;

}  // namespace zd
