#include <doctest.h>

#include <cmath>
#include <random>

#include "gravistat/energetics.hpp"
#include "oracles.hpp"

using namespace gravistat;

namespace {
const ModelSpec kMB = make_model(Statistics::MB, 0.0);

double rel(double a, double b) { return std::abs(a / b - 1.0); }
}  // namespace

TEST_CASE("Simpson rule on non-uniform grids") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gap(0.01, 0.3);
  for (int n : {2, 3, 4, 7, 8, 51, 52}) {
    Eigen::VectorXd x(n);
    x(0) = -1.0;
    for (int i = 1; i < n; ++i) x(i) = x(i - 1) + gap(rng);
    const double a = x(0), b = x(n - 1);
    // quadratics are exact on any grid, odd tail panel included
    Eigen::VectorXd quad = (x.array().square() * 3.0 - x.array() + 2.0).matrix();
    const double exact_quad = (b * b * b - a * a * a) - 0.5 * (b * b - a * a) + 2.0 * (b - a);
    if (n >= 3) CHECK(std::abs(simpson(x, quad) - exact_quad) < 1e-12);
    Eigen::VectorXd lin = (2.0 * x.array() + 1.0).matrix();
    CHECK(std::abs(simpson(x, lin) - ((b * b - a * a) + (b - a))) < 1e-12);
  }
  // cubics are exact when each panel pair is split evenly
  Eigen::VectorXd x(9);
  x(0) = 0.0;
  for (int i = 1; i < 9; i += 2) x(i + 1) = x(i - 1) + 2.0 * gap(rng), x(i) = 0.5 * (x(i - 1) + x(i + 1));
  Eigen::VectorXd cub = x.array().cube().matrix();
  CHECK(std::abs(simpson(x, cub) - 0.25 * std::pow(x(8), 4)) < 1e-12);
  Eigen::VectorXd one(1);
  one << 0.0;
  CHECK(simpson(one, one) == 0.0);
}

TEST_CASE("uniform-ball limit") {
  const double rho0 = 1e-4;
  const auto traj = integrate(kMB, rho0);
  const double beta = rho0 * std::log(rho0) - rho0;
  const double s = entropy(kMB, traj);
  const double pot = potential_energy(traj);
  CHECK(rel(s, 4.0 * M_PI / 3.0 * beta) < 1e-2);
  CHECK(rel(pot, 2.0 * M_PI * rho0 * rho0 / 45.0) < 1e-2);
  const auto rep = free_energy(kMB, traj);
  const double f_ball = 4.0 * M_PI / 3.0 * beta - 2.0 * M_PI * rho0 * rho0 / 45.0;
  CHECK(rel(rep.free_energy, f_ball) < 1e-2);
}

TEST_CASE("sFD correction to the entropy") {
  const double rho0 = 1e-4, eta = 0.1;
  const auto sfd = make_model(Statistics::sFD, eta);
  const double diff = entropy(sfd, integrate(sfd, rho0)) - entropy(kMB, integrate(kMB, rho0));
  CHECK(rel(diff, 4.0 * M_PI / 3.0 * 0.9 * eta * std::pow(rho0, 5.0 / 3.0)) < 0.1);
}

TEST_CASE("potential is negligible at small mass") {
  for (double rho0 : {1e-4, 1e-3}) {
    const auto traj = integrate(kMB, rho0);
    CHECK(potential_energy(traj) / std::abs(entropy(kMB, traj)) < 1e-2);
  }
  const auto a = integrate(kMB, 1e-5), b = integrate(kMB, 1e-3);
  CHECK(potential_energy(a) / std::abs(entropy(kMB, a)) <
        potential_energy(b) / std::abs(entropy(kMB, b)));
}

TEST_CASE("free energy is a single subtraction") {
  for (auto m : {kMB, make_model(Statistics::sFD, 0.05), make_model(Statistics::FD, 0.1)}) {
    const auto traj = integrate(m, 30.0);
    const auto rep = free_energy(m, traj);
    CHECK(rep.free_energy == rep.entropy - rep.potential);
    CHECK(rep.entropy == entropy(m, traj));
    CHECK(rep.potential == potential_energy(traj));
  }
}

TEST_CASE("four-pi convention doubles the potential") {
  const auto traj = integrate(kMB, 5.0);
  CHECK(potential_energy(traj, PotentialConvention::FourPi) == 2.0 * potential_energy(traj));
  const auto rep = free_energy(kMB, traj, PotentialConvention::FourPi);
  CHECK(rep.free_energy == rep.entropy - rep.potential);
}

TEST_CASE("eta = 0 reproduces MB energies") {
  const auto s0 = make_model(Statistics::sFD, 0.0);
  for (double rho0 : {1e-2, 10.0, 1e4}) {
    const auto a = free_energy(kMB, integrate(kMB, rho0));
    const auto b = free_energy(s0, integrate(s0, rho0));
    CHECK(std::abs(a.entropy - b.entropy) <= 1e-10 * std::abs(a.entropy));
    CHECK(std::abs(a.potential - b.potential) <= 1e-10 * a.potential);
    CHECK(std::abs(a.free_energy - b.free_energy) <= 1e-10 * std::abs(a.entropy));
  }
}

TEST_CASE("quadrature stability under doubled sampling") {
  IntegratorConfig fine;
  fine.dense_samples = 4000;
  for (auto m : {kMB, make_model(Statistics::sFD, 0.01), make_model(Statistics::FD, 0.1)}) {
    for (double rho0 : {1e-3, 1.0, 1e3, 1e6}) {
      const auto a = free_energy(m, integrate(m, rho0));
      const auto b = free_energy(m, integrate(m, rho0, fine));
      CHECK_MESSAGE(rel(a.entropy, b.entropy) < 1e-6, "rho0=" << rho0);
      CHECK_MESSAGE(rel(a.potential, b.potential) < 1e-6, "rho0=" << rho0);
    }
  }
}

TEST_CASE("entropy from p and from y agree") {
  for (auto m : {kMB, make_model(Statistics::sFD, 0.02)}) {
    const auto traj = integrate(m, 200.0);
    Eigen::VectorXd f(traj.size());
    for (Eigen::Index i = 0; i < traj.size(); ++i) {
      const double rho = std::exp(-2.0 * traj.s(i)) * traj.y(i);
      f(i) = std::exp(3.0 * traj.s(i)) * thermo(m, rho).entropy_density;
    }
    const double from_y = 4.0 * M_PI * simpson(traj.s, f);
    CHECK(std::abs(entropy(m, traj) - from_y) <= 1e-10 * std::abs(from_y));
  }
}
