#include "zd/loss.hpp"

#include <string>

#include "zd/error.hpp"

namespace zd {

namespace {

// Row-parallel kernel pays off only for large systems.
constexpr long kParallelRows = 512;

void check_dim(const LossModel& lm, std::size_t n) {
  if (lm.n != n || lm.B.size() != n * n || lm.B0.size() != n) {
    throw DispatchError(ErrorKind::DimensionMismatch,
                        "loss model has dimension " + std::to_string(lm.n) + ", dispatch has " +
                            std::to_string(n) + " outputs");
  }
}

}  // namespace

double transmission_loss_serial(const LossModel& lm, std::span<const double> p_mw) {
  check_dim(lm, p_mw.size());
  const std::size_t n = lm.n;
  const double base = lm.base_mva;
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = p_mw[i] / base;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += lm.B[i * n + j] * (p_mw[j] / base);
    quad += xi * row;
    lin += lm.B0[i] * xi;
  }
  return (quad + lin + lm.B00) * base;
}

double transmission_loss(const LossModel& lm, std::span<const double> p_mw) {
  check_dim(lm, p_mw.size());
  const long n = static_cast<long>(lm.n);
  if (n < kParallelRows) return transmission_loss_serial(lm, p_mw);
  const double base = lm.base_mva;
  const double* B = lm.B.data();
  const double* p = p_mw.data();
  double quad = 0.0;
  double lin = 0.0;
#pragma omp parallel for reduction(+ : quad, lin) schedule(static)
  for (long i = 0; i < n; ++i) {
    const double xi = p[i] / base;
    double row = 0.0;
    for (long j = 0; j < n; ++j) row += B[i * n + j] * (p[j] / base);
    quad += xi * row;
    lin += lm.B0[static_cast<std::size_t>(i)] * xi;
  }
  return (quad + lin + lm.B00) * base;
}

std::vector<double> loss_gradient(const LossModel& lm, std::span<const double> p_mw) {
  check_dim(lm, p_mw.size());
  const std::size_t n = lm.n;
  const double base = lm.base_mva;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sym = 0.0;
    for (std::size_t j = 0; j < n; ++j) sym += (lm.B[i * n + j] + lm.B[j * n + i]) * (p_mw[j] / base);
    // d(base * x'Bx)/dP_i = ((B + B')x)_i; the linear term contributes B0_i.
    g[i] = sym + lm.B0[i];
  }
  return g;
}

}  // namespace zd
