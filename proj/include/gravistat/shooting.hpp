#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gravistat/errors.hpp"
#include "gravistat/model.hpp"

namespace gravistat {

struct IntegratorConfig {
  double eps_cut = 1e-6;   // y at the truncation time t(eps)
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  long max_steps = 200000;
  int dense_samples = 2000;

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

struct InitialState {
  double t_start;
  double p;
  double q;
};

/// Truncated data at s = t(eps) = log(eps / rho0) / 2: p = rho0, q = rho0 / 3.
/// Requires 0 < eps_cut <= 1e-3 rho0.
InitialState initial_state(double rho0, double eps_cut);

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  int clamped = 0;        // tiny negative excursions of p or q set to zero
  double eps_used = 0.0;  // truncation level actually used
};

/// Solution of the shooting problem sampled on [t_start, 0] in s = log r.
/// p = e^{-2s} y is the density at radius e^s, q = e^{-2s} x.
struct Trajectory {
  ModelSpec model;
  double rho0 = 0.0;
  double t_start = 0.0;
  Eigen::VectorXd s, x, y, p, q;
  StepStats stats;
  bool complete = false;

  Eigen::Index size() const { return s.size(); }
};

/// Thrown when an integration stops early. Carries the samples computed so far.
class TrajectoryError : public IntegrationError {
 public:
  TrajectoryError(const std::string& what, Trajectory partial)
      : IntegrationError(what), partial_(std::make_shared<Trajectory>(std::move(partial))) {}
  const Trajectory& partial() const { return *partial_; }

 private:
  std::shared_ptr<const Trajectory> partial_;
};

/// Output grid on [t_start, 0]: half the points uniform in s (resolving the
/// centre) and half uniform in r = e^s (resolving the boundary layer).
Eigen::VectorXd sample_grid(double t_start, int samples);

/// Integrates q' = p - 3q, p' = -R(p) e^{2s} q from t(eps) to 0.
///
/// The cut-off actually used is min(cfg.eps_cut, 1e-3 rho0) so that small
/// central densities keep the truncation accurate.
Trajectory integrate(const ModelSpec& model, double rho0, const IntegratorConfig& cfg = {});

/// Same problem integrated directly in (x, y): x' = y - x,
/// y' = 2y - e^{2s} R(e^{-2s} y) x. Independent route used for cross-checks.
Trajectory integrate_xy(const ModelSpec& model, double rho0, const IntegratorConfig& cfg = {});

/// Physical solution recovered from a complete trajectory.
class SolutionProfile {
 public:
  explicit SolutionProfile(const Trajectory& traj);

  double mass() const { return mass_; }
  double normalized_mass() const { return m_; }
  double sup_density() const { return sup_density_; }
  double lambda() const { return lambda_; }
  double boundary_density() const { return boundary_density_; }

  /// rho(r) for r in (0, 1]; constant (= rho0) inside the truncation radius.
  double density(double r) const;
  /// phi(r) = lambda - H(rho(r)); vanishes at r = 1. Obtained from
  /// d phi / ds = e^{2s} q, so it stays finite where rho underflows.
  double potential(double r) const;

 private:
  ModelSpec model_;
  double mass_, m_, sup_density_, lambda_, boundary_density_;
  Eigen::VectorXd s_, p_, dp_, phi_, dphi_;
};

SolutionProfile reconstruct_profile(const Trajectory& traj);

/// sup_s |e^{-2s} (y_eta - y_0)| between the model and MB at equal rho0.
double trajectory_distance(const ModelSpec& model_eta, double rho0,
                           const IntegratorConfig& cfg = {});

}  // namespace gravistat
