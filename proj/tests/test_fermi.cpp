#include <doctest.h>

#include <cmath>
#include <random>

#include "gravistat/errors.hpp"
#include "gravistat/fermi.hpp"
#include "oracles.hpp"

using namespace gravistat;

namespace {
const FermiOrder kOrders[] = {FermiOrder::minus_half, FermiOrder::half, FermiOrder::three_halves};
}

TEST_CASE("order parsing") {
  CHECK(FermiOrder::from_alpha(0.5) == FermiOrder::half);
  CHECK(FermiOrder::from_alpha(-0.5).alpha() == -0.5);
  CHECK_THROWS_AS(FermiOrder::from_alpha(1.0), DomainError);
  CHECK_THROWS_AS(FermiOrder::from_alpha(2.5), DomainError);
}

TEST_CASE("config validation") {
  FermiEvalConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.abs_tol = cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.max_subdivisions = 0;
  CHECK_THROWS_AS(fermi_eval(FermiOrder::half, 0.0, cfg), PreconditionError);
}

TEST_CASE("values at zero against the eta series") {
  CHECK(oracle::fermi_at_zero(0.5) == doctest::Approx(0.6780938).epsilon(1e-6));
  CHECK(std::abs(fermi_eval(FermiOrder::half, 0.0) - oracle::fermi_at_zero(0.5)) < 1e-9);
  CHECK(std::abs(fermi_eval(FermiOrder::minus_half, 0.0) - oracle::fermi_at_zero(-0.5)) < 1e-9);
  CHECK(std::abs(fermi_eval(FermiOrder::three_halves, 0.0) - oracle::fermi_at_zero(1.5)) < 1e-9);
  CHECK(std::abs(fermi_eval(FermiOrder::half, 0.0) - 0.6780938) < 1e-6);
  CHECK(std::abs(fermi_eval(FermiOrder::minus_half, 0.0) - 1.0721549) < 1e-6);
}

TEST_CASE("deep Boltzmann tail") {
  const double f = fermi_eval(FermiOrder::half, -30.0);
  CHECK(std::abs(f / oracle::fermi_series(0.5, -30.0) - 1.0) < 1e-10);
  CHECK(f == doctest::Approx(8.2925e-14).epsilon(1e-4));
  for (double z : {-26.0, -24.0, -40.0, -200.0}) {
    for (auto order : kOrders) {
      const double ref = oracle::fermi_series(order.alpha(), z);
      CHECK(std::abs(fermi_eval(order, z) / ref - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("agreement with an independent quadrature") {
  for (double z : {-20.0, -10.0, -3.0, -1.0, -0.2, 0.3, 1.0, 2.5, 7.0, 15.0, 40.0, 120.0}) {
    for (auto order : kOrders) {
      const double ref = oracle::fermi_quad(order.alpha(), z);
      const double got = fermi_eval(order, z);
      CHECK_MESSAGE(std::abs(got - ref) <= 1e-10 * std::max(1.0, ref) + 1e-12,
                    "alpha=" << order.alpha() << " z=" << z);
    }
  }
}

TEST_CASE("series and quadrature regimes meet continuously") {
  for (auto order : kOrders) {
    const double below = fermi_eval(order, std::nextafter(-25.0, -30.0));
    const double at = fermi_eval(order, -25.0);
    CHECK(std::abs(at / below - 1.0) < 1e-9);
  }
}

TEST_CASE("degenerate asymptote") {
  const double z = 1e4;
  const double f = fermi_eval(FermiOrder::half, z);
  CHECK(std::abs(3.0 * f / (2.0 * std::pow(z, 1.5)) - 1.0) < 1e-7);
  for (auto order : kOrders) {
    const double a = order.alpha();
    const double lead = std::pow(z, a + 1.0) / (a + 1.0);
    CHECK(std::abs(fermi_eval(order, z) / lead - 1.0) < 1e-6);
  }
}

TEST_CASE("monotone in z on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    for (auto order : kOrders) CHECK(fermi_eval(order, a) < fermi_eval(order, b));
  }
}

TEST_CASE("f_{-1/2} <= 2 f_{1/2}") {
  for (double z : oracle::signed_log_grid(40.0, 1000)) {
    CHECK(fermi_eval(FermiOrder::minus_half, z) <= 2.0 * fermi_eval(FermiOrder::half, z));
  }
}

TEST_CASE("results are positive") {
  for (double z : {-700.0, -100.0, -25.0, 0.0, 700.0})
    for (auto order : kOrders) CHECK(fermi_eval(order, z) > 0.0);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(fermi_eval(FermiOrder::half, NAN), DomainError);
  CHECK_THROWS_AS(fermi_eval(FermiOrder::half, INFINITY), DomainError);
  CHECK_THROWS_AS(fermi_derivative(FermiOrder::minus_half, 0.0), DomainError);
  CHECK_THROWS_AS(fermi_inverse_half(0.0), DomainError);
  CHECK_THROWS_AS(fermi_inverse_half(-1.0), DomainError);
}

TEST_CASE("starved quadrature reports its error estimate") {
  FermiEvalConfig cfg;
  cfg.abs_tol = 0.0;
  cfg.rel_tol = 1e-15;
  cfg.max_subdivisions = 1;
  try {
    fermi_eval(FermiOrder::minus_half, 5e4, cfg);
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    CHECK(e.achieved_error() > 0.0);
  }
}

TEST_CASE("derivative") {
  auto central = [](FermiOrder o, double z) {
    const double h = 1e-4;
    return (fermi_eval(o, z + h) - fermi_eval(o, z - h)) / (2 * h);
  };
  CHECK(std::abs(fermi_derivative(FermiOrder::three_halves, 0.0) - 1.0171407) < 1e-5);
  CHECK(std::abs(fermi_derivative(FermiOrder::half, 0.0) - 0.5360775) < 1e-5);
  CHECK(std::abs(fermi_derivative(FermiOrder::three_halves, 0.0) -
                 central(FermiOrder::three_halves, 0.0)) < 1e-5);
  const double tail = fermi_eval(FermiOrder::half, -20.0);
  CHECK(std::abs(fermi_derivative(FermiOrder::half, -20.0) / tail - 1.0) < 1e-6);

  for (double z : oracle::linspace(-10.0, 10.0, 41)) {
    for (auto o : {FermiOrder::half, FermiOrder::three_halves}) {
      CHECK(std::abs(fermi_derivative(o, z) - central(o, z)) < 1e-5);
    }
  }
}

TEST_CASE("inverse of f_{1/2}") {
  const double v3 = fermi_eval(FermiOrder::half, 3.0);
  CHECK(std::abs(fermi_inverse_half(v3) - 3.0) < 1e-8);
  CHECK(std::abs(fermi_inverse_half(0.6780938)) < 1e-5);
  CHECK(std::abs(fermi_inverse_half(2.0 / 3.0 * 1e6) / 1e4 - 1.0) < 1e-3);

  for (double z : oracle::linspace(-20.0, 20.0, 81)) {
    CHECK(std::abs(fermi_inverse_half(fermi_eval(FermiOrder::half, z)) - z) < 1e-8);
  }
  // a seed far from the answer still converges
  CHECK(std::abs(fermi_inverse_half(v3, {}, -50.0) - 3.0) < 1e-8);
  CHECK(std::abs(fermi_inverse_half(v3, {}, 2.9) - 3.0) < 1e-8);

  double prev = -INFINITY;
  for (double v : oracle::logspace(1e-12, 1e8, 60)) {
    const double z = fermi_inverse_half(v);
    CHECK(z > prev);
    prev = z;
  }
}

TEST_CASE("excess integral") {
  for (double z : {-40.0, -26.0, -10.0, -1.0, 0.0, 0.7, 3.0, 12.0}) {
    const double ref = oracle::excess_quad(z);
    CHECK_MESSAGE(std::abs(fermi_half_excess(z) / ref - 1.0) < 1e-8, "z=" << z);
  }
  // degenerate regime: G = (2/3) z^{3/2} - z^{1/2} + O(z^{-1/2})
  const double z = 1e6;
  CHECK(std::abs(fermi_half_excess(z) / (2.0 / 3.0 * z * 1e3 - 1e3) - 1.0) < 1e-9);
}
