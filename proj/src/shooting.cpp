#include "gravistat/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gravistat/dopri5.hpp"

namespace gravistat {

namespace {

using State = Eigen::Vector2d;

double effective_eps(double rho0, const IntegratorConfig& cfg) {
  return std::min(cfg.eps_cut, 1e-3 * rho0);
}

// Boundary densities below this (relative to min(1, rho0)) are recovered
// from the integrated multiplier rather than from H(p(0)).
constexpr double kResolvedDensity = 1e-3;

// Cubic Hermite interpolant on [a, b] with end values and slopes.
double hermite(double a, double b, double fa, double fb, double da, double db, double s) {
  const double h = b - a;
  const double t = (s - a) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * fa + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * fb +
         (t3 - t2) * h * db;
}

void check_rho0(double rho0) {
  if (!(rho0 > 0.0) || !std::isfinite(rho0))
    throw DomainError("central density rho0 must be finite and > 0");
}

std::string describe(Dopri5Status status) {
  switch (status) {
    case Dopri5Status::StepLimit: return "step limit exhausted";
    case Dopri5Status::StepUnderflow: return "step size underflow";
    case Dopri5Status::Stopped: return "state left the positive quadrant";
    case Dopri5Status::Completed: return "completed";
  }
  return "unknown";
}

// Shared driver: `first`/`second` name the state components (q, p) or (x, y)
// and `to_pq` maps a state at s to (q, p).
template <typename Rhs, typename ToPq>
Trajectory run(const ModelSpec& model, double rho0, const IntegratorConfig& cfg,
               const State& start, double abs_tol, Rhs rhs, ToPq to_pq) {
  const double eps = effective_eps(rho0, cfg);
  const InitialState init = initial_state(rho0, eps);

  Trajectory traj;
  traj.model = model;
  traj.rho0 = rho0;
  traj.t_start = init.t_start;
  traj.stats.eps_used = eps;

  const Eigen::VectorXd grid = sample_grid(init.t_start, cfg.dense_samples);

  Dopri5Options<double> opts;
  opts.abs_tol = abs_tol;
  opts.rel_tol = cfg.rel_tol;
  opts.max_steps = cfg.max_steps;

  // Across the degenerate edge p decays at rate e^{2s} q, which is stiff for
  // an explicit method: a step can overshoot zero by about the value it
  // started from. Undershoots up to that plus 10 abs_tol are clamped;
  // anything larger is a breakdown.
  bool breakdown = false;
  State prev = start;
  auto on_step = [&](double, State& u) {
    if (u.minCoeff() >= 0.0) {
      prev = u;
      return StepVerdict::Continue;
    }
    const State floor = -(10.0 * abs_tol + prev.cwiseAbs().array()).matrix();
    if ((u.array() < floor.array()).any()) {
      breakdown = true;
      return StepVerdict::Stop;
    }
    u = u.cwiseMax(0.0);
    prev = u;
    ++traj.stats.clamped;
    return StepVerdict::Modified;
  };

  auto result = integrate_dopri5<double, 2>(
      rhs, init.t_start, start, 0.0,
      std::span<const double>(grid.data(), static_cast<std::size_t>(grid.size())), opts,
      on_step);

  traj.stats.accepted = result.accepted;
  traj.stats.rejected = result.rejected;
  traj.stats.rhs_evals = result.rhs_evals;

  const auto n = static_cast<Eigen::Index>(result.dense.size());
  traj.s = grid.head(n);
  traj.x.resize(n);
  traj.y.resize(n);
  traj.p.resize(n);
  traj.q.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const State qp = to_pq(traj.s[i], result.dense[static_cast<std::size_t>(i)]);
    const double scale = std::exp(2.0 * traj.s[i]);
    traj.q[i] = qp[0];
    traj.p[i] = qp[1];
    traj.x[i] = scale * qp[0];
    traj.y[i] = scale * qp[1];
  }
  // Exact initial data at the first sample (no interpolation involved).
  if (n > 0) {
    traj.p[0] = init.p;
    traj.q[0] = init.q;
  }

  traj.complete = result.status == Dopri5Status::Completed && n == grid.size();
  if (!traj.complete) {
    const std::string why = breakdown ? "numerical breakdown: p or q became negative"
                                      : describe(result.status);
    throw TrajectoryError("integration failed at s = " + std::to_string(result.t_reached) +
                              " for rho0 = " + std::to_string(rho0) + ": " + why,
                          std::move(traj));
  }
  return traj;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(eps_cut > 0.0 && eps_cut < 1.0))
    throw PreconditionError("IntegratorConfig: eps_cut must lie in (0, 1)");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw PreconditionError("IntegratorConfig: tolerances must be > 0");
  if (max_steps <= 0) throw PreconditionError("IntegratorConfig: max_steps must be positive");
  if (dense_samples < 2) throw PreconditionError("IntegratorConfig: dense_samples must be >= 2");
}

InitialState initial_state(double rho0, double eps_cut) {
  check_rho0(rho0);
  if (!(eps_cut > 0.0) || eps_cut > 1e-3 * rho0 * (1.0 + 1e-12))
    throw PreconditionError("eps_cut must satisfy 0 < eps_cut <= 1e-3 rho0 (got eps_cut = " +
                            std::to_string(eps_cut) + ", rho0 = " + std::to_string(rho0) + ")");
  return {0.5 * std::log(eps_cut / rho0), rho0, rho0 / 3.0};
}

Eigen::VectorXd sample_grid(double t_start, int samples) {
  const int n_s = std::max(2, samples / 2 + samples % 2);
  const int n_r = std::max(2, samples - n_s + 2);  // endpoints are shared
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n_s + n_r));
  const Eigen::VectorXd in_s = Eigen::VectorXd::LinSpaced(n_s, t_start, 0.0);
  const Eigen::VectorXd in_r =
      Eigen::VectorXd::LinSpaced(n_r, std::exp(t_start), 1.0).array().log();
  pts.insert(pts.end(), in_s.begin(), in_s.end());
  pts.insert(pts.end(), in_r.begin() + 1, in_r.end() - 1);
  std::sort(pts.begin(), pts.end());

  std::vector<double> unique;
  unique.reserve(pts.size());
  const double min_gap = 1e-9 * std::max(1.0, -t_start);
  for (double v : pts) {
    if (unique.empty() || v - unique.back() > min_gap) unique.push_back(v);
  }
  unique.front() = t_start;
  unique.back() = 0.0;
  return Eigen::Map<Eigen::VectorXd>(unique.data(), static_cast<Eigen::Index>(unique.size()));
}

Trajectory integrate(const ModelSpec& model, double rho0, const IntegratorConfig& cfg) {
  check_rho0(rho0);
  cfg.validate();
  ModelEvaluator eval(model);
  auto rhs = [&eval](double s, const State& u) {
    const double q = u[0], p = u[1];
    const double r = p > 0.0 ? eval.response(p) : 0.0;
    return State(p - 3.0 * q, -r * std::exp(2.0 * s) * q);
  };
  const State start(rho0 / 3.0, rho0);
  // p and q are O(rho0); below rho0 = 1 the absolute tolerance follows them.
  return run(model, rho0, cfg, start, cfg.abs_tol * std::min(1.0, rho0), rhs,
             [](double, const State& u) { return u; });
}

Trajectory integrate_xy(const ModelSpec& model, double rho0, const IntegratorConfig& cfg) {
  check_rho0(rho0);
  cfg.validate();
  const double eps = effective_eps(rho0, cfg);
  ModelEvaluator eval(model);
  auto rhs = [&eval](double s, const State& u) {
    const double x = u[0], y = u[1];
    const double e2 = std::exp(2.0 * s);
    const double density = y / e2;
    const double r = density > 0.0 ? eval.response(density) : 0.0;
    return State(y - x, 2.0 * y - e2 * r * x);
  };
  const State start(eps / 3.0, eps);
  // x, y start at O(eps); scale the absolute tolerance like x = e^{2s} q.
  const double abs_tol = cfg.abs_tol * std::min(1.0, rho0) * eps / rho0;
  return run(model, rho0, cfg, start, abs_tol, rhs, [](double s, const State& u) {
    return State(u * std::exp(-2.0 * s));
  });
}

SolutionProfile::SolutionProfile(const Trajectory& traj) : model_(traj.model) {
  if (!traj.complete || traj.size() < 2 || traj.s[traj.size() - 1] != 0.0)
    throw PreconditionError("reconstruct_profile needs a trajectory complete up to s = 0");
  const Eigen::Index last = traj.size() - 1;
  m_ = traj.q[last];
  mass_ = 4.0 * M_PI * m_;
  sup_density_ = traj.rho0;
  boundary_density_ = traj.p[last];

  ModelEvaluator eval(model_);
  s_ = traj.s;
  p_ = traj.p;
  dp_.resize(traj.size());
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    const double r = traj.p[i] > 0.0 ? eval.response(traj.p[i]) : 0.0;
    dp_[i] = -r * std::exp(2.0 * traj.s[i]) * traj.q[i];
  }

  // H(p(s)) = H(rho0) - int_{t_start}^s e^{2u} q du. Hermite-Simpson panels
  // with g = e^{2s} q and g' = e^{2s} (p - q).
  const Eigen::Index n = traj.size();
  Eigen::VectorXd g(n), dg(n), cum(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e2 = std::exp(2.0 * traj.s[i]);
    g[i] = e2 * traj.q[i];
    dg[i] = e2 * (traj.p[i] - traj.q[i]);
  }
  cum[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = traj.s[i] - traj.s[i - 1];
    cum[i] = cum[i - 1] + 0.5 * h * (g[i - 1] + g[i]) + h * h / 12.0 * (dg[i - 1] - dg[i]);
  }
  phi_ = cum.array() - cum[last];
  dphi_ = g;

  // Direct evaluation is exact up to the error in p(0); fall back to the
  // integrated form once p(0) is too small to carry relative accuracy.
  if (boundary_density_ >= kResolvedDensity * std::min(1.0, sup_density_)) {
    lambda_ = eval.enthalpy(boundary_density_);
  } else {
    lambda_ = eval.enthalpy(sup_density_) - cum[last];
  }
}

double SolutionProfile::density(double r) const {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("density: radius must lie in (0, 1]");
  const double s = std::log(r);
  if (s <= s_[0]) return p_[0];
  const auto begin = s_.data();
  const auto end = s_.data() + s_.size();
  const auto it = std::upper_bound(begin, end, s);
  const Eigen::Index hi = std::min<Eigen::Index>(it - begin, s_.size() - 1);
  const Eigen::Index lo = hi - 1;
  return std::max(0.0, hermite(s_[lo], s_[hi], p_[lo], p_[hi], dp_[lo], dp_[hi], s));
}

double SolutionProfile::potential(double r) const {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("potential: radius must lie in (0, 1]");
  const double s = std::log(r);
  if (s <= s_[0]) return phi_[0];
  const auto begin = s_.data();
  const auto it = std::upper_bound(begin, begin + s_.size(), s);
  const Eigen::Index hi = std::min<Eigen::Index>(it - begin, s_.size() - 1);
  const Eigen::Index lo = hi - 1;
  return hermite(s_[lo], s_[hi], phi_[lo], phi_[hi], dphi_[lo], dphi_[hi], s);
}

SolutionProfile reconstruct_profile(const Trajectory& traj) { return SolutionProfile(traj); }

double trajectory_distance(const ModelSpec& model_eta, double rho0, const IntegratorConfig& cfg) {
  if (model_eta.kind == Statistics::MB)
    throw PreconditionError("trajectory_distance compares an sFD or FD model against MB");
  const Trajectory perturbed = integrate(model_eta, rho0, cfg);
  const Trajectory reference = integrate(make_model(Statistics::MB, 0.0), rho0, cfg);
  return (perturbed.p - reference.p).cwiseAbs().maxCoeff();
}

}  // namespace gravistat
