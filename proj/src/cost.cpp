#include "zd/cost.hpp"

#include <cmath>
#include <numbers>

namespace zd {

namespace {

constexpr double kKinkSinTol = 1e-10;

// Points p_min + (m + offset) * pi / f strictly inside the interval.
std::vector<double> lattice_points(const Unit& u, Interval iv, double offset) {
  std::vector<double> out;
  if (!u.has_valve() || iv.empty()) return out;
  const double period = std::numbers::pi / u.f;
  const double m_lo = std::ceil((iv.lb - u.p_min) / period - offset);
  const double m_hi = std::floor((iv.ub - u.p_min) / period - offset);
  for (double m = m_lo; m <= m_hi; m += 1.0) {
    const double p = u.p_min + (m + offset) * period;
    if (p > iv.lb && p < iv.ub) out.push_back(p);
  }
  return out;
}

}  // namespace

double quadratic_cost(const Unit& u, double p) noexcept { return (u.a * p + u.b) * p + u.c; }

CostBreakdown valve_cost(const Unit& u, double p) noexcept {
  CostBreakdown out;
  out.quadratic = quadratic_cost(u, p);
  out.valve = u.e > 0.0 ? std::abs(u.e * std::sin(u.f * (p - u.p_min))) : 0.0;
  out.total = out.quadratic + out.valve;
  return out;
}

double total_cost(std::span<const Unit> units, std::span<const double> p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) sum += unit_cost(units[i], p[i]);
  return sum;
}

std::vector<double> kink_points(const Unit& u, Interval iv) { return lattice_points(u, iv, 0.0); }

std::vector<double> ripple_peaks(const Unit& u, Interval iv) { return lattice_points(u, iv, 0.5); }

OneSided smooth_piece_derivative(const Unit& u, double p) noexcept {
  const double base = 2.0 * u.a * p + u.b;
  if (!(u.e > 0.0) || !(u.f > 0.0)) return {base, base};
  const double arg = u.f * (p - u.p_min);
  const double s = std::sin(arg);
  const double ef = u.e * u.f;
  if (std::abs(s) <= kKinkSinTol) {
    // |sin| grows at slope |cos| = 1 on both sides of its zero.
    return {base - ef, base + ef};
  }
  const double d = base + (s > 0.0 ? 1.0 : -1.0) * ef * std::cos(arg);
  return {d, d};
}

}  // namespace zd
