#include "gravistat/energetics.hpp"

#include <cmath>

namespace gravistat {

namespace {

void require_complete(const Trajectory& traj) {
  if (!traj.complete || traj.size() < 2)
    throw PreconditionError("energies need a trajectory complete up to s = 0");
}

}  // namespace

double entropy(const ModelSpec& model, const Trajectory& traj) {
  require_complete(traj);
  ModelEvaluator eval(model);
  Eigen::VectorXd beta(traj.size());
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    beta[i] = traj.p[i] > 0.0 ? eval.thermo(traj.p[i]).entropy_density : 0.0;
  }
  const Eigen::VectorXd integrand = (3.0 * traj.s.array()).exp() * beta.array();
  return 4.0 * M_PI * simpson(traj.s, integrand);
}

double potential_energy(const Trajectory& traj, PotentialConvention convention) {
  require_complete(traj);
  const Eigen::VectorXd integrand = (5.0 * traj.s.array()).exp() * traj.q.array().square();
  const double prefactor = convention == PotentialConvention::Definition ? 2.0 * M_PI : 4.0 * M_PI;
  return prefactor * simpson(traj.s, integrand);
}

EnergyReport free_energy(const ModelSpec& model, const Trajectory& traj,
                         PotentialConvention convention) {
  EnergyReport report;
  report.entropy = entropy(model, traj);
  report.potential = potential_energy(traj, convention);
  report.free_energy = report.entropy - report.potential;
  return report;
}

}  // namespace gravistat
