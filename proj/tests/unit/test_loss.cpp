#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "zd/error.hpp"

using namespace zd;

namespace {

LossModel zero_model(std::size_t n) {
  LossModel lm;
  lm.n = n;
  lm.B.assign(n * n, 0.0);
  lm.B0.assign(n, 0.0);
  return lm;
}

LossModel random_model(std::size_t n, std::uint64_t seed, bool symmetric) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1e-4, 1e-4);
  LossModel lm = zero_model(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) lm.B[i * n + j] = u(gen);
    lm.B[i * n + i] = 2e-4 + std::abs(u(gen));
    lm.B0[i] = u(gen);
  }
  if (symmetric) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) lm.B[j * n + i] = lm.B[i * n + j];
    }
  }
  lm.B00 = 3e-4;
  return lm;
}

std::vector<double> random_p(std::size_t n, std::mt19937_64& gen, double lo = 10, double hi = 500) {
  std::vector<double> p(n);
  for (auto& v : p) v = std::uniform_real_distribution<double>(lo, hi)(gen);
  return p;
}

}  // namespace

TEST_CASE("null model gives zero loss") {
  const LossModel lm = zero_model(3);
  CHECK(transmission_loss(lm, std::vector<double>{100, 200, 300}) == 0.0);
}

TEST_CASE("zero output leaves only the constant term") {
  LossModel lm = zero_model(2);
  lm.B00 = 0.0056;
  lm.base_mva = 100;
  CHECK(transmission_loss(lm, std::vector<double>{0, 0}) == doctest::Approx(0.56));
}

TEST_CASE("6-unit reference dispatch loss") {
  const SystemCase sc = zdtest::load("6unit");
  const std::vector<double> p{447.5038, 173.3182, 263.4628, 139.0653, 165.4734, 87.1347};
  CHECK(std::abs(transmission_loss(*sc.loss, p) - 12.9582) <= 5e-4);
}

TEST_CASE("15-unit reference dispatch loss") {
  const SystemCase sc = zdtest::load("15unit");
  const auto rt = load_reported(zdtest::data_path("reported/table3.rows"));
  const auto& ref = rt.rows.back();
  REQUIRE(ref.method == "MINLP reference");
  CHECK(std::abs(transmission_loss(*sc.loss, ref.p) - 30.6614) <= 5e-4);
}

TEST_CASE("dimension mismatch") {
  const LossModel lm = zero_model(3);
  CHECK_THROWS_AS(transmission_loss(lm, std::vector<double>{1, 2}), DispatchError);
  CHECK_THROWS_AS(loss_gradient(lm, std::vector<double>{1, 2}), DispatchError);
}

TEST_CASE("diagonal 2-unit gradient") {
  LossModel lm = zero_model(2);
  const double beta = 1e-4;
  lm.B = {beta, 0, 0, beta};
  const std::vector<double> p{150, 80};
  const auto g = loss_gradient(lm, p);
  CHECK(g[0] == doctest::Approx(2 * beta * 1.5));
  CHECK(g[1] == doctest::Approx(2 * beta * 0.8));
}

TEST_CASE("gradient matches central differences on the 6-unit model") {
  const SystemCase sc = zdtest::load("6unit");
  const LossModel& lm = *sc.loss;
  std::mt19937_64 gen(5);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_p(6, gen);
    const auto g = loss_gradient(lm, p);
    for (std::size_t i = 0; i < 6; ++i) {
      auto hi = p, lo = p;
      hi[i] += 1e-4;
      lo[i] -= 1e-4;
      const double fd = (transmission_loss(lm, hi) - transmission_loss(lm, lo)) / 2e-4;
      CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])) + 1e-9);
    }
  }
}

TEST_CASE("gradient matches central differences at 1000 random points") {
  const SystemCase sc = zdtest::load("15unit");
  const LossModel& lm = *sc.loss;
  std::mt19937_64 gen(17);
  for (int t = 0; t < 1000; ++t) {
    const auto p = random_p(15, gen, 15, 455);
    const std::size_t i = static_cast<std::size_t>(t) % 15;
    const auto g = loss_gradient(lm, p);
    auto hi = p, lo = p;
    hi[i] += 1e-4;
    lo[i] -= 1e-4;
    const double fd = (transmission_loss(lm, hi) - transmission_loss(lm, lo)) / 2e-4;
    CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1e-3, std::abs(g[i])));
  }
}

TEST_CASE("loss is invariant under symmetrization") {
  const LossModel asym = random_model(7, 21, false);
  LossModel sym = asym;
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) sym.B[i * 7 + j] = 0.5 * (asym.B[i * 7 + j] + asym.B[j * 7 + i]);
  }
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_p(7, gen);
    CHECK(transmission_loss(asym, p) == doctest::Approx(transmission_loss(sym, p)).epsilon(1e-12));
  }
}

TEST_CASE("pure quadratic form scales with the square") {
  LossModel lm = random_model(5, 9, true);
  lm.B0.assign(5, 0.0);
  lm.B00 = 0.0;
  std::mt19937_64 gen(4);
  const auto p = random_p(5, gen);
  auto p3 = p;
  for (auto& v : p3) v *= 3;
  CHECK(transmission_loss(lm, p3) == doctest::Approx(9 * transmission_loss(lm, p)).epsilon(1e-12));
}

TEST_CASE("first-order Taylor error shrinks quadratically") {
  const LossModel lm = random_model(6, 31, true);
  std::mt19937_64 gen(8);
  const auto p = random_p(6, gen);
  const auto g = loss_gradient(lm, p);
  std::vector<double> d(6);
  for (auto& v : d) v = std::uniform_real_distribution<double>(-1, 1)(gen);
  auto err = [&](double s) {
    auto q = p;
    double lin = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      q[i] += s * d[i];
      lin += g[i] * s * d[i];
    }
    return std::abs(transmission_loss(lm, q) - transmission_loss(lm, p) - lin);
  };
  const double e1 = err(1.0);
  const double e2 = err(0.1);
  CHECK(e2 == doctest::Approx(e1 / 100).epsilon(1e-3));
}

TEST_CASE("parallel loss kernel agrees with the serial reference") {
  const std::size_t n = 700;
  const LossModel lm = random_model(n, 41, true);
  std::mt19937_64 gen(6);
  const auto p = random_p(n, gen);
  const double serial = transmission_loss_serial(lm, p);
  CHECK(transmission_loss(lm, p) == doctest::Approx(serial).epsilon(1e-12));
}
