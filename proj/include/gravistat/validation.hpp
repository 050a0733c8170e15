#pragma once

#include <string>
#include <vector>

#include "gravistat/branch.hpp"
#include "gravistat/model.hpp"
#include "gravistat/shooting.hpp"

namespace gravistat {

/// Outcome of one inequality monitor. Slack values are normalized to be
/// dimensionless; `passed` iff worst_margin >= -tolerance.
struct CheckReport {
  std::string name;
  bool passed = false;
  double worst_margin = 0.0;  // most negative (normalized) slack observed
  double location = 0.0;      // s- or z-value where it was observed
  double tolerance = 0.0;
  bool inconclusive = false;
};

/// Positivity of x and y, y <= 3x, the three monotone quantities e^{-2s} y,
/// e^{-2s} x, e^{s} (3x - y), and q/p = 1/3 at the first sample. Computed
/// from the stored (x, y) samples; slacks are scaled by rho0.
std::vector<CheckReport> check_trajectory_invariants(const Trajectory& traj,
                                                     double tolerance = 1e-8);

/// m <= rho0 / 3 and 2H(rho0) - R(rho0) m <= m + 2H(3m).
std::vector<CheckReport> check_mass_estimates(const ModelSpec& model,
                                              const SolutionProfile& profile,
                                              double tolerance = 1e-8);

/// Both mass estimates at every sample of a branch; location is the rho0
/// of the worst slack.
std::vector<CheckReport> check_branch_mass_estimates(const Branch& branch,
                                                     double tolerance = 1e-8);

/// Integrates the (x, y) system backward from s = 0 with data (x0, y0),
/// y0 >= 3 x0, and passes iff the orbit leaves the closed positive quadrant
/// before `horizon`. worst_margin is (s_exit - horizon) on exit, -1 when the
/// horizon is reached inside the quadrant, NaN when the step budget runs out
/// (inconclusive).
CheckReport check_quadrant_exit(const ModelSpec& model, double x0, double y0,
                                const IntegratorConfig& cfg = {}, double horizon = -60.0);

/// (eta / 6) rho0^{8/3} e^{rho0 / 3}: bound on trajectory_distance for sFD.
double gronwall_bound(double eta, double rho0);

/// trajectory_distance against gronwall_bound for an sFD model.
CheckReport check_gronwall(const ModelSpec& model, double rho0, const IntegratorConfig& cfg = {});

struct MatrixEntry {
  ModelSpec model;
  double rho0 = 0.0;
  std::vector<CheckReport> reports;
  std::string error;  // non-empty if the integration itself failed
};

/// Models {MB, sFD(1e-4, 1e-2, 5e-2), FD(1e-2, 1e-1)} x rho0 {1e-4, 1, 1e2, 1e6},
/// each with the trajectory and mass-estimate checks. Entries are computed
/// concurrently and returned in a fixed order.
std::vector<MatrixEntry> run_standard_matrix(const IntegratorConfig& cfg = {},
                                             double tolerance = 1e-8, int threads = 0);

}  // namespace gravistat
