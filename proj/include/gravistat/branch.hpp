#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gravistat/energetics.hpp"
#include "gravistat/model.hpp"
#include "gravistat/shooting.hpp"

namespace gravistat {

struct BranchSample {
  double rho0 = 0.0;
  double mass = 0.0;
  double m = 0.0;
  double sup_density = 0.0;
  double lambda = 0.0;
  double entropy = 0.0;
  double potential = 0.0;
  double free_energy = 0.0;

  bool operator==(const BranchSample&) const = default;
};

struct BranchFailure {
  double rho0;
  std::string message;
};

/// Solutions sampled along a log-spaced grid of central densities.
struct Branch {
  ModelSpec model;
  IntegratorConfig cfg;
  PotentialConvention convention = PotentialConvention::Definition;
  std::vector<BranchSample> samples;  // strictly increasing rho0
  std::vector<BranchFailure> failures;
};

struct SweepOptions {
  int threads = 0;  // 0: GRAVISTAT_THREADS, else hardware concurrency
  PotentialConvention convention = PotentialConvention::Definition;
};

/// Worker count for sweeps: `requested` if positive, else the
/// GRAVISTAT_THREADS environment cap, else hardware concurrency.
int sweep_threads(int requested = 0);

/// Integrates, reconstructs and evaluates energies at one central density.
BranchSample evaluate_point(const ModelSpec& model, double rho0, const IntegratorConfig& cfg,
                            PotentialConvention convention = PotentialConvention::Definition);

/// M(rho0) only; the sample grid is reduced to the two endpoints.
double mass_at(const ModelSpec& model, double rho0, const IntegratorConfig& cfg);

/// Sweeps `points` log-spaced central densities in [rho0_min, rho0_max].
/// Failed points are kept in Branch::failures; more than 10 % failed points
/// raise BranchError.
Branch trace_branch(const ModelSpec& model, double rho0_min, double rho0_max, int points,
                    const IntegratorConfig& cfg = {}, const SweepOptions& opts = {});

struct TurningPoint {
  int n = 0;              // 1-based index within its sequence
  double mass = 0.0;      // refined extremal mass
  double rho0 = 0.0;      // refined location
  double rho0_lo = 0.0;   // grid bracket
  double rho0_hi = 0.0;
};

struct TurningPointSet {
  std::vector<TurningPoint> lower;  // local minima of M
  std::vector<TurningPoint> upper;  // local maxima of M

  /// lower increasing, upper decreasing, every lower below every upper.
  bool ordered() const;
};

/// Locates local extrema of M along the branch and refines each by a
/// parabolic step followed by golden-section search on fresh integrations.
TurningPointSet detect_turning_points(const Branch& branch);

struct SolutionCount {
  int count = 0;
  std::vector<double> roots;  // rho0 values with M(rho0) = target
  std::vector<std::pair<double, double>> unresolved;
  bool lower_bound = false;   // true when some bracket could not be refined
};

/// Counts solutions of M(rho0) = mass_target along the branch.
SolutionCount count_solutions(const Branch& branch, double mass_target);

/// Root of M(rho0) = mass_target in [rho0_lo, rho0_hi] to 1e-8 relative in
/// rho0. The bracket must show a sign change; endpoint masses may be passed
/// in to avoid recomputation.
double refine_root(const ModelSpec& model, double mass_target, double rho0_lo, double rho0_hi,
                   const IntegratorConfig& cfg, std::optional<double> mass_lo = std::nullopt,
                   std::optional<double> mass_hi = std::nullopt);

}  // namespace gravistat
