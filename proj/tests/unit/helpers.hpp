#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "zd/case_io.hpp"
#include "zd/cost.hpp"
#include "zd/loss.hpp"
#include "zd/subproblem.hpp"

namespace zdtest {

inline std::string data_path(const std::string& rel) { return std::string(ZD_DATA_DIR) + "/" + rel; }

inline zd::SystemCase load(const std::string& name) { return zd::load_case(data_path("cases/" + name + ".case")); }

inline const std::vector<std::string>& bundled_cases() {
  static const std::vector<std::string> names{"6unit",       "15unit",        "15unit_valve",   "15unit_noloss",
                                              "40unit_block", "toy2_loss",     "toy2_poz",       "toy3_valve",
                                              "toy3_poz_reserve"};
  return names;
}

inline std::vector<double> grid(double lb, double ub, double h) {
  std::vector<double> g;
  const auto steps = static_cast<long>(std::floor((ub - lb) / h + 1e-9));
  g.reserve(static_cast<std::size_t>(steps) + 2);
  for (long k = 0; k <= steps; ++k) g.push_back(lb + static_cast<double>(k) * h);
  if (g.back() < ub) g.push_back(ub);
  return g;
}

struct OracleResult {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> p;
};

// Output of `free_unit` that balances demand + loss with the others fixed.
// Loss in MW is quadratic in the free output: m x^2 + (2 sum_j m_fj p_j + b0_f - 1) x + rest = 0.
inline std::optional<double> balance_output(const zd::SystemCase& sc, const std::vector<double>& p, std::size_t f) {
  const std::size_t n = sc.size();
  double others = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != f) others += p[j];
  }
  if (!sc.loss) return sc.demand - others;
  const auto& lm = *sc.loss;
  const double base = lm.base_mva;
  const double a = lm.b(f, f) / base;
  double lin = lm.B0[f] - 1.0;
  double rest = lm.B00 * base + sc.demand - others;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == f) continue;
    lin += 2.0 * lm.b(f, i) / base * p[i];
    rest += lm.B0[i] * p[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != f) rest += p[i] * lm.b(i, j) / base * p[j];
    }
  }
  if (a == 0.0) return -rest / lin;
  const double disc = lin * lin - 4.0 * a * rest;
  if (disc < 0.0) return std::nullopt;
  // Root closest to the lossless answer.
  const double r1 = (-lin - std::sqrt(disc)) / (2.0 * a);
  const double r2 = (-lin + std::sqrt(disc)) / (2.0 * a);
  return std::abs(r1 + rest / lin) < std::abs(r2 + rest / lin) ? r1 : r2;
}

// Exhaustive search on a grid of step h over every unit except `free_unit`,
// which takes the balancing output. Works for 2 and 3 units.
inline OracleResult grid_oracle(const zd::SystemCase& sc, const zd::Bounds& b, std::size_t free_unit, double h) {
  const std::size_t n = sc.size();
  std::vector<std::size_t> gridded;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != free_unit) gridded.push_back(i);
  }
  std::vector<std::vector<double>> pts, costs;
  for (std::size_t i : gridded) {
    pts.push_back(grid(b.lb[i], b.ub[i], h));
    std::vector<double> c;
    for (double x : pts.back()) c.push_back(zd::unit_cost(sc.units[i], x));
    costs.push_back(std::move(c));
  }
  OracleResult best;
  std::vector<double> p(n, 0.0);
  const zd::Unit& fu = sc.units[free_unit];
  auto visit = [&](double partial_cost) {
    const auto x = balance_output(sc, p, free_unit);
    if (!x || *x < b.lb[free_unit] || *x > b.ub[free_unit]) return;
    p[free_unit] = *x;
    if (sc.reserve_req > 0.0 && zd::total_reserve(sc.units, p) < sc.reserve_req - 1e-9) return;
    const double c = partial_cost + zd::unit_cost(fu, *x);
    if (c < best.cost) {
      best.cost = c;
      best.p = p;
    }
  };
  if (gridded.size() == 1) {
    for (std::size_t a = 0; a < pts[0].size(); ++a) {
      p[gridded[0]] = pts[0][a];
      visit(costs[0][a]);
    }
  } else {
    for (std::size_t a = 0; a < pts[0].size(); ++a) {
      p[gridded[0]] = pts[0][a];
      for (std::size_t c = 0; c < pts[1].size(); ++c) {
        p[gridded[1]] = pts[1][c];
        visit(costs[0][a] + costs[1][c]);
      }
    }
  }
  return best;
}

}  // namespace zdtest
