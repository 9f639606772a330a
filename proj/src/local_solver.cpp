#include "local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "zd/cost.hpp"
#include "zd/loss.hpp"

namespace zd::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTopCandidates = 8;
constexpr std::size_t kFullScanLimit = 400;

// Root of A x^2 + B x + C = 0 that tends to -C/B as A -> 0. B < 0 on every
// physically meaningful pair (incremental loss below one).
double stable_root(double a, double b, double c) noexcept {
  if (!(b < 0.0)) return kNaN;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kNaN;
  return 2.0 * c / (-b + std::sqrt(disc));
}

double slope_of(const Unit& u, double x, bool right) noexcept {
  const OneSided d = smooth_piece_derivative(u, x);
  return right ? d.right : d.left;
}

}  // namespace

LossKernel::LossKernel(const SystemCase& sc) : n(sc.size()) {
  if (!sc.loss) return;
  const LossModel& lm = *sc.loss;
  active = true;
  m.resize(n * n);
  for (std::size_t i = 0; i < n * n; ++i) m[i] = lm.B[i] / lm.base_mva;
  b0 = lm.B0;
  k = lm.B00 * lm.base_mva;
}

double PairLine::partner_of_i(double xi) const noexcept {
  return stable_root(bjj, 2.0 * bij * xi + uj - 1.0, bii * xi * xi + ui * xi - xi + k);
}

double PairLine::partner_of_j(double xj) const noexcept {
  return stable_root(bii, 2.0 * bij * xj + ui - 1.0, bjj * xj * xj + uj * xj - xj + k);
}

double PairLine::dxj_dxi(double xi, double xj) const noexcept {
  const double dli = 2.0 * bii * xi + 2.0 * bij * xj + ui;
  const double dlj = 2.0 * bjj * xj + 2.0 * bij * xi + uj;
  return -(1.0 - dli) / (1.0 - dlj);
}

LocalSolver::LocalSolver(const SystemCase& sc, const Bounds& bounds, const SolveOptions& opts,
                         const LossKernel& kernel)
    : sc_(sc),
      bounds_(bounds),
      opts_(opts),
      kernel_(kernel),
      n_(sc.size()),
      demand_(sc.demand),
      reserve_active_(sc.reserve_req > 0.0),
      nonconvex_(sc.has_valve()) {}

std::vector<double> LocalSolver::warm_start() const {
  try {
    return lambda_dispatch(sc_.units, bounds_.lb, bounds_.ub, demand_).p;
  } catch (const DispatchError&) {
    std::vector<double> p(n_);
    for (std::size_t i = 0; i < n_; ++i) p[i] = 0.5 * (bounds_.lb[i] + bounds_.ub[i]);
    return p;
  }
}

std::vector<double> LocalSolver::random_start(int k) const {
  const auto seed = opts_.rng_seed;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k)};
  std::mt19937_64 gen(seq);
  std::vector<double> p(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double lo = bounds_.lb[i];
    const double hi = bounds_.ub[i];
    p[i] = hi > lo ? std::uniform_real_distribution<double>(lo, hi)(gen) : lo;
  }
  return p;
}

double LocalSolver::reserve_of(std::size_t i, double x) const noexcept {
  return reserve_available(sc_.units[i], x);
}

void LocalSolver::refresh() {
  sum_ = 0.0;
  for (double v : p_) sum_ += v;
  if (kernel_.active) {
    q_.assign(n_, 0.0);
    loss_ = kernel_.k;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += kernel_.mij(i, j) * p_[j];
      q_[i] = s;
      loss_ += p_[i] * s + kernel_.b0[i] * p_[i];
    }
  } else {
    loss_ = 0.0;
  }
  moves_since_refresh_ = 0;
}

void LocalSolver::shift(std::size_t i, double delta) {
  if (delta == 0.0) return;
  if (kernel_.active) {
    loss_ += delta * (2.0 * q_[i] + kernel_.mij(i, i) * delta + kernel_.b0[i]);
    for (std::size_t k = 0; k < n_; ++k) q_[k] += kernel_.mij(k, i) * delta;
  }
  sum_ += delta;
  p_[i] += delta;
}

double LocalSolver::delta_loss_dp(std::size_t i) const noexcept {
  return kernel_.active ? 2.0 * q_[i] + kernel_.b0[i] : 0.0;
}

PairLine LocalSolver::pair_line(std::size_t i, std::size_t j) const noexcept {
  PairLine L;
  const double pi = p_[i];
  const double pj = p_[j];
  double w = 0.0;
  if (kernel_.active) {
    L.bii = kernel_.mij(i, i);
    L.bjj = kernel_.mij(j, j);
    L.bij = kernel_.mij(i, j);
    L.ui = 2.0 * (q_[i] - L.bii * pi - L.bij * pj) + kernel_.b0[i];
    L.uj = 2.0 * (q_[j] - L.bij * pi - L.bjj * pj) + kernel_.b0[j];
    w = loss_ - (L.bii * pi * pi + L.bjj * pj * pj + 2.0 * L.bij * pi * pj + L.ui * pi + L.uj * pj);
  }
  const double others = sum_ - pi - pj;
  L.k = w + demand_ - others;
  return L;
}

std::optional<LocalSolver::Move> LocalSolver::search_pair(std::size_t i, std::size_t j, bool two_sided) {
  const Unit& ui = sc_.units[i];
  const Unit& uj = sc_.units[j];
  const double lbi = bounds_.lb[i], ubi = bounds_.ub[i];
  const double lbj = bounds_.lb[j], ubj = bounds_.ub[j];
  const PairLine L = pair_line(i, j);
  const double pi = p_[i];

  // Range of x_i keeping x_j in bounds; x_j falls as x_i rises.
  double xlo = lbi;
  double xhi = ubi;
  if (const double a = L.partner_of_j(ubj); std::isfinite(a)) xlo = std::max(xlo, a);
  if (const double b = L.partner_of_j(lbj); std::isfinite(b)) xhi = std::min(xhi, b);
  if (!two_sided) xlo = pi;
  xlo = std::min(xlo, pi);
  xhi = std::max(xhi, pi);
  if (xhi - xlo <= 1e-12) return std::nullopt;

  auto xj_of = [&](double xi) {
    const double xj = L.partner_of_i(xi);
    return std::isfinite(xj) ? std::clamp(xj, lbj, ubj) : kNaN;
  };
  auto phi = [&](double xi) {
    const double xj = xj_of(xi);
    if (!std::isfinite(xj)) return kInf;
    return unit_cost(ui, xi) + unit_cost(uj, xj);
  };
  auto dphi = [&](double xi) {
    const double xj = xj_of(xi);
    if (!std::isfinite(xj)) return 0.0;
    return slope_of(ui, xi, true) + slope_of(uj, xj, true) * L.dxj_dxi(xi, xj);
  };
  double reserve_rest = 0.0;
  if (reserve_active_) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (k != i && k != j) reserve_rest += reserve_of(k, p_[k]);
    }
  }
  auto reserve_ok = [&](double xi) {
    if (!reserve_active_) return true;
    const double xj = xj_of(xi);
    if (!std::isfinite(xj)) return false;
    return reserve_rest + reserve_of(i, xi) + reserve_of(j, xj) >= sc_.reserve_req - 1e-9;
  };

  std::vector<double> xs{xlo, pi, xhi};
  auto add_i = [&](double x) {
    if (x > xlo && x < xhi) xs.push_back(x);
  };
  auto add_j = [&](double x) {
    const double xi = L.partner_of_j(x);
    if (std::isfinite(xi)) add_i(xi);
  };
  const Interval span_i{xlo, xhi};
  const Interval span_j{lbj, ubj};
  for (double x : kink_points(ui, span_i)) add_i(x);
  for (double x : ripple_peaks(ui, span_i)) add_i(x);
  for (double x : kink_points(uj, span_j)) add_j(x);
  for (double x : ripple_peaks(uj, span_j)) add_j(x);
  if (reserve_active_) {
    if (std::isfinite(ui.reserve_cap)) add_i(ui.p_max - ui.reserve_cap);
    if (std::isfinite(uj.reserve_cap)) add_j(uj.p_max - uj.reserve_cap);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a <= 1e-12; }), xs.end());

  const double phi0 = phi(pi);
  double best_x = pi;
  double best_f = phi0;
  auto consider = [&](double x, double f) {
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  };
  auto boundary = [&](double ok_x, double bad_x) {
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (ok_x + bad_x);
      if (reserve_ok(mid)) {
        ok_x = mid;
      } else {
        bad_x = mid;
      }
    }
    return ok_x;
  };

  constexpr int bits = std::numeric_limits<double>::digits / 2;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    double xa = xs[s];
    double xb = xs[s + 1];
    const bool oka = reserve_ok(xa);
    const bool okb = reserve_ok(xb);
    if (!oka && !okb) continue;
    if (!oka) xa = boundary(xb, xa);
    if (!okb) xb = boundary(xa, xb);
    consider(xa, phi(xa));
    consider(xb, phi(xb));
    const double width = xb - xa;
    if (width <= 1e-9) continue;
    const double h = 1e-7 * width;
    const double da = dphi(xa + h);
    const double db = dphi(xb - h);
    if (da >= 0.0 && db <= 0.0) continue;  // concave-looking piece: endpoints suffice
    std::uintmax_t max_iter = 100;
    const auto [xm, fm] = boost::math::tools::brent_find_minima(phi, xa, xb, bits, max_iter);
    consider(xm, fm);
  }

  const double gain = phi0 - best_f;
  if (!(gain > opts_.improve_tol)) return std::nullopt;
  return Move{best_x - pi, gain};
}

void LocalSolver::apply(std::size_t i, std::size_t j, double t) {
  const PairLine L = pair_line(i, j);
  const double xi = std::clamp(p_[i] + t, bounds_.lb[i], bounds_.ub[i]);
  double xj = L.partner_of_i(xi);
  if (!std::isfinite(xj)) return;
  xj = std::clamp(xj, bounds_.lb[j], bounds_.ub[j]);
  shift(i, xi - p_[i]);
  shift(j, xj - p_[j]);
  ++iters_;
  if (++moves_since_refresh_ >= 64) refresh();
}

bool LocalSolver::descend() {
  std::vector<double> up(n_), down(n_);
  std::vector<std::size_t> ups, downs;
  struct Cand {
    double gap;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  auto try_cands = [&]() {
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.gap > b.gap; });
    for (const Cand& c : cands) {
      if (auto mv = search_pair(c.i, c.j, false)) {
        apply(c.i, c.j, mv->t);
        return true;
      }
    }
    return false;
  };

  while (iters_ < opts_.max_iter) {
    ups.clear();
    downs.clear();
    for (std::size_t k = 0; k < n_; ++k) {
      const Unit& u = sc_.units[k];
      const double denom = 1.0 - delta_loss_dp(k);
      if (p_[k] < bounds_.ub[k] - 1e-12) {
        up[k] = slope_of(u, p_[k], true) / denom;
        ups.push_back(k);
      }
      if (p_[k] > bounds_.lb[k] + 1e-12) {
        down[k] = slope_of(u, p_[k], false) / denom;
        downs.push_back(k);
      }
    }
    std::stable_sort(ups.begin(), ups.end(), [&](std::size_t a, std::size_t b) { return up[a] < up[b]; });
    std::stable_sort(downs.begin(), downs.end(), [&](std::size_t a, std::size_t b) { return down[a] > down[b]; });

    cands.clear();
    const std::size_t ku = std::min<std::size_t>(ups.size(), kTopCandidates);
    const std::size_t kd = std::min<std::size_t>(downs.size(), kTopCandidates);
    for (std::size_t a = 0; a < ku; ++a) {
      for (std::size_t b = 0; b < kd; ++b) {
        const std::size_t i = ups[a], j = downs[b];
        const double gap = down[j] - up[i];
        if (i != j && gap > opts_.gap_tol) cands.push_back({gap, i, j});
      }
    }
    if (try_cands()) continue;

    if (n_ > kFullScanLimit) return true;
    cands.clear();
    for (std::size_t i : ups) {
      for (std::size_t j : downs) {
        const double gap = down[j] - up[i];
        if (gap <= opts_.gap_tol) break;
        if (i != j) cands.push_back({gap, i, j});
      }
    }
    if (!try_cands()) return true;
  }
  return false;
}

bool LocalSolver::probe() {
  for (int pass = 0; pass < opts_.probe_passes; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (auto mv = search_pair(i, j, true)) {
          apply(i, j, mv->t);
          improved = true;
        }
      }
    }
    if (!improved) return true;
    if (!descend()) return false;
  }
  return true;
}

bool LocalSolver::polish_balance() {
  refresh();
  const double tight = 1e-9 * (1.0 + demand_);
  if (std::abs(residual()) <= tight) return true;
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> margin(n_);
  for (std::size_t k = 0; k < n_; ++k) margin[k] = std::min(p_[k] - bounds_.lb[k], bounds_.ub[k] - p_[k]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return margin[a] > margin[b]; });
  for (std::size_t k : order) {
    const double mkk = kernel_.active ? kernel_.mij(k, k) : 0.0;
    const double uk = kernel_.active ? 2.0 * (q_[k] - mkk * p_[k]) + kernel_.b0[k] : 0.0;
    const double w = loss_ - mkk * p_[k] * p_[k] - uk * p_[k];
    const double others = sum_ - p_[k];
    const double x = stable_root(mkk, uk - 1.0, w + demand_ - others);
    if (!std::isfinite(x)) continue;
    shift(k, std::clamp(x, bounds_.lb[k], bounds_.ub[k]) - p_[k]);
    refresh();
    if (std::abs(residual()) <= tight) return true;
  }
  return std::abs(residual()) <= tight;
}

bool LocalSolver::restore_balance() {
  refresh();
  const double tight = 1e-9 * (1.0 + demand_);
  for (int it = 0; it < 200 && std::abs(residual()) > tight; ++it) {
    const double r = residual();
    double room = 0.0;
    for (std::size_t k = 0; k < n_; ++k) room += r > 0.0 ? bounds_.ub[k] - p_[k] : p_[k] - bounds_.lb[k];
    if (room <= 1e-12) return false;
    const double frac = std::min(1.0, std::abs(r) / room);
    for (std::size_t k = 0; k < n_; ++k) {
      const double d = r > 0.0 ? frac * (bounds_.ub[k] - p_[k]) : -frac * (p_[k] - bounds_.lb[k]);
      p_[k] = std::clamp(p_[k] + d, bounds_.lb[k], bounds_.ub[k]);
    }
    refresh();
  }
  return polish_balance();
}

bool LocalSolver::repair_reserve() {
  if (!reserve_active_) return true;
  const int limit = 4 * static_cast<int>(n_) + 8;
  for (int it = 0; it < limit; ++it) {
    double total = 0.0;
    for (std::size_t k = 0; k < n_; ++k) total += reserve_of(k, p_[k]);
    const double deficit = sc_.reserve_req - total;
    if (deficit <= 1e-9) return true;

    // Raise a unit whose reserve is capped, lower one whose reserve is headroom.
    std::size_t recv = n_, donor = n_;
    double recv_room = 1e-12, donor_room = 1e-12;
    for (std::size_t k = 0; k < n_; ++k) {
      const Unit& u = sc_.units[k];
      const double knee = u.p_max - u.reserve_cap;
      const double rr = std::min(bounds_.ub[k], knee) - p_[k];
      if (rr > recv_room) {
        recv_room = rr;
        recv = k;
      }
      const double dr = p_[k] - std::max(bounds_.lb[k], knee);
      if (dr > donor_room) {
        donor_room = dr;
        donor = k;
      }
    }
    if (recv == n_ || donor == n_) return false;
    const PairLine L = pair_line(recv, donor);
    const double xj = p_[donor] - std::min(deficit, donor_room);
    double xi = L.partner_of_j(xj);
    if (!std::isfinite(xi)) return false;
    xi = std::clamp(xi, p_[recv], p_[recv] + recv_room);
    if (xi - p_[recv] <= 1e-12) return false;
    apply(recv, donor, xi - p_[recv]);
  }
  return false;
}

std::optional<SubproblemResult> LocalSolver::run(std::vector<double> p0) {
  p_ = std::move(p0);
  for (std::size_t k = 0; k < n_; ++k) p_[k] = std::clamp(p_[k], bounds_.lb[k], bounds_.ub[k]);
  iters_ = 0;
  if (!restore_balance()) return std::nullopt;
  if (!repair_reserve()) return std::nullopt;

  bool converged = descend();
  if (converged && nonconvex_) converged = probe();
  polish_balance();

  SubproblemResult r;
  r.p = p_;
  r.cost = total_cost(sc_.units, r.p);
  r.loss_mw = sc_.loss ? transmission_loss(*sc_.loss, r.p) : 0.0;
  double sum = 0.0;
  for (double v : r.p) sum += v;
  r.balance_residual = std::abs(sum - demand_ - r.loss_mw);
  r.reserve = total_reserve(sc_.units, r.p);
  if (reserve_active_ && r.reserve < sc_.reserve_req - 1e-6) return std::nullopt;
  r.converged = converged && r.balance_residual <= opts_.balance_tol;
  r.iterations = iters_;
  return r;
}

}  // namespace zd::detail
