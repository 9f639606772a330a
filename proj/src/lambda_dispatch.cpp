// Exact equal-incremental-cost dispatch over a box.
//
// Total output T(lambda) is piecewise linear and non-decreasing, with
// breakpoints where a unit hits a bound (b + 2a*lb, b + 2a*ub) and jumps at
// lambda = b for units with a = 0. Bisection over the sorted breakpoints
// brackets the crossing with demand, then the linear piece is solved exactly.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zd/cost.hpp"
#include "zd/subproblem.hpp"

namespace zd {

namespace {

struct Response {
  std::span<const Unit> units;
  std::span<const double> lb;
  std::span<const double> ub;

  // Output of unit i at price lambda. For linear units the tie at lambda == b
  // resolves to lb (upper == false) or ub (upper == true).
  double at(std::size_t i, double lambda, bool upper) const noexcept {
    const Unit& u = units[i];
    if (u.a > 0.0) return std::clamp((lambda - u.b) / (2.0 * u.a), lb[i], ub[i]);
    if (lambda < u.b) return lb[i];
    if (lambda > u.b) return ub[i];
    return upper ? ub[i] : lb[i];
  }

  double total(double lambda, bool upper) const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < units.size(); ++i) s += at(i, lambda, upper);
    return s;
  }
};

double quad_cost(std::span<const Unit> units, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) s += quadratic_cost(units[i], p[i]);
  return s;
}

}  // namespace

LambdaDispatch lambda_dispatch(std::span<const Unit> units, std::span<const double> lb,
                               std::span<const double> ub, double demand, bool at_least) {
  const std::size_t n = units.size();
  const Response resp{units, lb, ub};
  LambdaDispatch out;
  out.p.resize(n);

  double sum_lb = 0.0;
  double sum_ub = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (lb[i] > ub[i]) throw DispatchError(ErrorKind::Infeasible, "empty bounds for unit " + units[i].id);
    sum_lb += lb[i];
    sum_ub += ub[i];
  }
  const double tol = 1e-9 * (1.0 + std::abs(demand));
  if (sum_ub < demand - tol || (!at_least && sum_lb > demand + tol)) {
    std::ostringstream os;
    os << "bounds sum to [" << sum_lb << ", " << sum_ub << "] MW, demand " << demand << " MW";
    throw DispatchError(ErrorKind::Infeasible, os.str());
  }

  if (at_least) {
    // Unconstrained minimizer already covers demand.
    if (resp.total(0.0, false) >= demand) {
      for (std::size_t i = 0; i < n; ++i) out.p[i] = resp.at(i, 0.0, false);
      out.lambda = 0.0;
      out.cost = quad_cost(units, out.p);
      return out;
    }
  }

  std::vector<double> bps;
  bps.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Unit& u = units[i];
    if (u.a > 0.0) {
      bps.push_back(u.b + 2.0 * u.a * lb[i]);
      bps.push_back(u.b + 2.0 * u.a * ub[i]);
    } else {
      bps.push_back(u.b);
    }
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  double lambda = 0.0;
  if (demand <= sum_lb) {
    lambda = bps.front();
    for (std::size_t i = 0; i < n; ++i) out.p[i] = lb[i];
  } else if (demand >= sum_ub) {
    lambda = bps.back();
    for (std::size_t i = 0; i < n; ++i) out.p[i] = ub[i];
  } else {
    // Smallest breakpoint whose upper total reaches demand.
    std::size_t lo = 0;
    std::size_t hi = bps.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (resp.total(bps[mid], true) >= demand) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const double bp = bps[lo];
    const double t_lower = resp.total(bp, false);
    if (t_lower <= demand || lo == 0) {
      lambda = bp;
      // Linear units priced exactly at bp take up the slack pro rata.
      double flat_room = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        out.p[i] = resp.at(i, bp, false);
        if (!(units[i].a > 0.0) && units[i].b == bp) flat_room += ub[i] - lb[i];
      }
      const double excess = demand - t_lower;
      if (flat_room > 0.0 && excess > 0.0) {
        const double share = std::min(1.0, excess / flat_room);
        for (std::size_t i = 0; i < n; ++i) {
          if (!(units[i].a > 0.0) && units[i].b == bp) out.p[i] = lb[i] + share * (ub[i] - lb[i]);
        }
      }
    } else {
      const double left = bps[lo - 1];
      const double mid = 0.5 * (left + bp);
      double fixed = 0.0;
      double slope = 0.0;
      double offset = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Unit& u = units[i];
        const double x = resp.at(i, mid, false);
        if (u.a > 0.0 && x > lb[i] && x < ub[i]) {
          slope += 1.0 / (2.0 * u.a);
          offset += u.b / (2.0 * u.a);
        } else {
          fixed += x;
        }
      }
      lambda = slope > 0.0 ? (demand - fixed + offset) / slope : mid;
      lambda = std::clamp(lambda, left, bp);
      for (std::size_t i = 0; i < n; ++i) out.p[i] = resp.at(i, lambda, false);
    }
  }

  // Push the rounding residual onto a unit with room.
  double sum = 0.0;
  for (double v : out.p) sum += v;
  double resid = demand - sum;
  if (resid != 0.0 && (!at_least || resid > 0.0)) {
    for (std::size_t i = 0; i < n && resid != 0.0; ++i) {
      const double room = resid > 0.0 ? ub[i] - out.p[i] : lb[i] - out.p[i];
      const double step = resid > 0.0 ? std::min(resid, room) : std::max(resid, room);
      out.p[i] += step;
      resid -= step;
    }
  }
  out.lambda = lambda;
  out.cost = quad_cost(units, out.p);
  return out;
}

}  // namespace zd
