#pragma once

#include <Eigen/Core>

#include "gravistat/model.hpp"
#include "gravistat/shooting.hpp"

namespace gravistat {

/// Prefactor used for the potential energy. `Definition` is
/// (1/2) int_B |grad phi|^2 = 2 pi int e^{5s} q^2 ds; `FourPi` doubles it,
/// matching the prefactor printed alongside the published figures.
enum class PotentialConvention { Definition, FourPi };

struct EnergyReport {
  double entropy = 0.0;
  double potential = 0.0;
  double free_energy = 0.0;
};

/// Composite Simpson rule on a strictly increasing, possibly non-uniform
/// grid. An odd trailing interval uses the quadratic through the last three
/// nodes.
template <typename DerivedX, typename DerivedF>
double simpson(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedF>& f) {
  const Eigen::Index n = x.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (x(1) - x(0)) * (f(0) + f(1));
  double sum = 0.0;
  Eigen::Index i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = x(i + 1) - x(i);
    const double h1 = x(i + 2) - x(i + 1);
    const double hs = h0 + h1;
    sum += hs / 6.0 *
           ((2.0 - h1 / h0) * f(i) + hs * hs / (h0 * h1) * f(i + 1) + (2.0 - h0 / h1) * f(i + 2));
  }
  if (i + 1 < n) {
    const double h0 = x(i) - x(i - 1);
    const double h1 = x(i + 1) - x(i);
    const double a = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
    const double b = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
    const double c = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    sum += a * f(i + 1) + b * f(i) - c * f(i - 1);
  }
  return sum;
}

/// Generalized entropy 4 pi int e^{3s} beta(p(s)) ds over [t_start, 0].
double entropy(const ModelSpec& model, const Trajectory& traj);

/// Self-consistent potential energy from q(s).
double potential_energy(const Trajectory& traj,
                        PotentialConvention convention = PotentialConvention::Definition);

/// Entropy, potential energy and free energy = entropy - potential.
EnergyReport free_energy(const ModelSpec& model, const Trajectory& traj,
                         PotentialConvention convention = PotentialConvention::Definition);

}  // namespace gravistat
