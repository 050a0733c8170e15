#include "gravistat/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "gravistat/branch.hpp"
#include "gravistat/dopri5.hpp"

namespace gravistat {

namespace {

// Tracks the smallest slack and where it occurred.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  double location = 0.0;

  void observe(double slack, double where) {
    if (slack < margin) {
      margin = slack;
      location = where;
    }
  }
  CheckReport report(std::string name, double tolerance) const {
    return {std::move(name), margin >= -tolerance, margin, location, tolerance, false};
  }
};

}  // namespace

std::vector<CheckReport> check_trajectory_invariants(const Trajectory& traj, double tolerance) {
  const Eigen::Index n = traj.size();
  const double scale = traj.rho0;
  const Eigen::ArrayXd e2 = (-2.0 * traj.s.array()).exp();
  const Eigen::ArrayXd p = e2 * traj.y.array();  // e^{-2s} y
  const Eigen::ArrayXd q = e2 * traj.x.array();  // e^{-2s} x
  const Eigen::ArrayXd w = (3.0 * traj.s.array()).exp() * (3.0 * q - p);  // e^{s} (3x - y)

  Worst x_pos, y_pos, cone, p_mono, q_mono, w_mono;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = traj.s[i];
    x_pos.observe(q[i] / scale, s);
    y_pos.observe(p[i] / scale, s);
    cone.observe((3.0 * q[i] - p[i]) / scale, s);
    if (i + 1 < n) {
      const double s1 = traj.s[i + 1];
      p_mono.observe((p[i] - p[i + 1]) / scale, s1);
      q_mono.observe((q[i] - q[i + 1]) / scale, s1);
      w_mono.observe((w[i + 1] - w[i]) / scale, s1);
    }
  }
  Worst ratio;
  if (n > 0) ratio.observe(-3.0 * std::abs(q[0] / p[0] - 1.0 / 3.0), traj.s[0]);

  return {x_pos.report("x >= 0", tolerance),
          y_pos.report("y >= 0", tolerance),
          cone.report("y <= 3x", tolerance),
          p_mono.report("e^{-2s} y nonincreasing", tolerance),
          q_mono.report("e^{-2s} x nonincreasing", tolerance),
          w_mono.report("e^{s} (3x - y) nondecreasing", tolerance),
          ratio.report("initial q/p = 1/3", tolerance)};
}

namespace {

struct MassSlacks {
  double simple;  // (rho0/3 - m) / (rho0/3)
  double estimate;  // (m + 2H(3m) - 2H(rho0) + R(rho0) m) / scale
};

MassSlacks mass_slacks(ModelEvaluator& eval, double rho_sup, double m) {
  const double h_sup = eval.enthalpy(rho_sup);
  const double r_sup = eval.response(rho_sup);
  const double h_3m = eval.enthalpy(3.0 * m);
  const double lhs = 2.0 * h_sup - r_sup * m;
  const double rhs = m + 2.0 * h_3m;
  const double scale = std::max({2.0 * std::abs(h_sup) + std::abs(r_sup * m),
                                 std::abs(m) + 2.0 * std::abs(h_3m),
                                 std::numeric_limits<double>::min()});
  return {(rho_sup / 3.0 - m) / (rho_sup / 3.0), (rhs - lhs) / scale};
}

constexpr const char* kSimpleName = "m <= rho0 / 3";
constexpr const char* kEstimateName = "2H(rho0) - R(rho0) m <= m + 2H(3m)";

}  // namespace

std::vector<CheckReport> check_mass_estimates(const ModelSpec& model,
                                              const SolutionProfile& profile, double tolerance) {
  ModelEvaluator eval(model);
  const double rho_sup = profile.sup_density();
  const auto slack = mass_slacks(eval, rho_sup, profile.normalized_mass());
  Worst simple, estimate;
  simple.observe(slack.simple, rho_sup);
  estimate.observe(slack.estimate, rho_sup);
  return {simple.report(kSimpleName, tolerance), estimate.report(kEstimateName, tolerance)};
}

std::vector<CheckReport> check_branch_mass_estimates(const Branch& branch, double tolerance) {
  ModelEvaluator eval(branch.model);
  Worst simple, estimate;
  for (const auto& smp : branch.samples) {
    const auto slack = mass_slacks(eval, smp.sup_density, smp.m);
    simple.observe(slack.simple, smp.rho0);
    estimate.observe(slack.estimate, smp.rho0);
  }
  return {simple.report(kSimpleName, tolerance), estimate.report(kEstimateName, tolerance)};
}

CheckReport check_quadrant_exit(const ModelSpec& model, double x0, double y0,
                                const IntegratorConfig& cfg, double horizon) {
  if (!(x0 > 0.0) || !(y0 >= 3.0 * x0))
    throw PreconditionError("check_quadrant_exit needs x0 > 0 and y0 >= 3 x0");
  if (!(horizon < 0.0)) throw PreconditionError("check_quadrant_exit needs a negative horizon");

  using State = Eigen::Vector2d;
  ModelEvaluator eval(model);
  auto rhs = [&eval](double s, const State& u) {
    const double e2 = std::exp(2.0 * s);
    const double density = u[1] / e2;
    const double r = density > 0.0 ? eval.response(density) : 0.0;
    return State(u[1] - u[0], 2.0 * u[1] - e2 * r * u[0]);
  };
  double exit_at = 0.0;
  bool exited = false;
  auto on_step = [&](double s, State& u) {
    if (u[0] < 0.0 || u[1] < 0.0) {
      exited = true;
      exit_at = s;
      return StepVerdict::Stop;
    }
    return StepVerdict::Continue;
  };
  Dopri5Options<double> opts;
  opts.abs_tol = cfg.abs_tol;
  opts.rel_tol = cfg.rel_tol;
  opts.max_steps = cfg.max_steps;
  const auto result = integrate_dopri5<double, 2>(rhs, 0.0, State(x0, y0), horizon,
                                                  std::span<const double>{}, opts, on_step);

  CheckReport report;
  report.name = "quadrant exit before s = " + std::to_string(horizon);
  report.tolerance = 0.0;
  if (exited) {
    report.passed = true;
    report.worst_margin = exit_at - horizon;
    report.location = exit_at;
  } else if (result.status == Dopri5Status::Completed) {
    report.passed = false;
    report.worst_margin = -1.0;
    report.location = horizon;
  } else {
    report.passed = false;
    report.inconclusive = true;
    report.worst_margin = std::numeric_limits<double>::quiet_NaN();
    report.location = result.t_reached;
  }
  return report;
}

double gronwall_bound(double eta, double rho0) {
  return eta / 6.0 * std::pow(rho0, 8.0 / 3.0) * std::exp(rho0 / 3.0);
}

CheckReport check_gronwall(const ModelSpec& model, double rho0, const IntegratorConfig& cfg) {
  if (model.kind != Statistics::sFD)
    throw PreconditionError("the explicit Gronwall bound is stated for sFD only");
  const double bound = gronwall_bound(model.eta, rho0);
  const double distance = trajectory_distance(model, rho0, cfg);
  Worst w;
  w.observe(bound > 0.0 ? (bound - distance) / bound : -distance, rho0);
  return w.report("trajectory distance <= (eta/6) rho0^{8/3} e^{rho0/3}", 0.0);
}

std::vector<MatrixEntry> run_standard_matrix(const IntegratorConfig& cfg, double tolerance,
                                             int threads) {
  const std::vector<ModelSpec> models = {
      make_model(Statistics::MB, 0.0),   make_model(Statistics::sFD, 1e-4),
      make_model(Statistics::sFD, 1e-2), make_model(Statistics::sFD, 5e-2),
      make_model(Statistics::FD, 1e-2),  make_model(Statistics::FD, 1e-1)};
  const std::vector<double> densities = {1e-4, 1.0, 1e2, 1e6};

  std::vector<MatrixEntry> entries;
  for (const auto& model : models)
    for (double rho0 : densities) entries.push_back({model, rho0, {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      MatrixEntry& e = entries[i];
      try {
        const Trajectory traj = integrate(e.model, e.rho0, cfg);
        e.reports = check_trajectory_invariants(traj, tolerance);
        const auto mass = check_mass_estimates(e.model, SolutionProfile(traj), tolerance);
        e.reports.insert(e.reports.end(), mass.begin(), mass.end());
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  {
    const int n = std::min<int>(sweep_threads(threads), static_cast<int>(entries.size()));
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return entries;
}

}  // namespace gravistat
