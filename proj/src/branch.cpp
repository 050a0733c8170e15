#include "gravistat/branch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>

namespace gravistat {

namespace {

constexpr double kGolden = 0.3819660112501051;  // 2 - phi

void check_grid(const Branch& branch) {
  for (std::size_t i = 1; i < branch.samples.size(); ++i) {
    if (!(branch.samples[i].rho0 > branch.samples[i - 1].rho0))
      throw PreconditionError("branch samples must have strictly increasing rho0");
  }
}

// Extremum of `sign * M` (sign = +1 for maxima) inside the bracket (a, c, b)
// in u = log rho0, where the interior point beats both ends.
std::pair<double, double> golden_extremum(const ModelSpec& model, const IntegratorConfig& cfg,
                                          double sign, double a, double c, double fc, double b) {
  auto f = [&](double u) { return sign * mass_at(model, std::exp(u), cfg); };
  while (b - a > 1e-6) {
    const bool right = (b - c) > (c - a);
    const double probe = right ? c + kGolden * (b - c) : c - kGolden * (c - a);
    const double fp = f(probe);
    if (fp > fc) {
      if (right) a = c;
      else b = c;
      c = probe;
      fc = fp;
    } else {
      if (right) b = probe;
      else a = probe;
    }
  }
  return {c, sign * fc};
}

}  // namespace

int sweep_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GRAVISTAT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) return cap;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BranchSample evaluate_point(const ModelSpec& model, double rho0, const IntegratorConfig& cfg,
                            PotentialConvention convention) {
  const Trajectory traj = integrate(model, rho0, cfg);
  const SolutionProfile profile(traj);
  const EnergyReport energy = free_energy(model, traj, convention);
  BranchSample sample;
  sample.rho0 = rho0;
  sample.mass = profile.mass();
  sample.m = profile.normalized_mass();
  sample.sup_density = profile.sup_density();
  sample.lambda = profile.lambda();
  sample.entropy = energy.entropy;
  sample.potential = energy.potential;
  sample.free_energy = energy.free_energy;
  return sample;
}

double mass_at(const ModelSpec& model, double rho0, const IntegratorConfig& cfg) {
  IntegratorConfig coarse = cfg;
  coarse.dense_samples = 2;
  const Trajectory traj = integrate(model, rho0, coarse);
  return 4.0 * M_PI * traj.q[traj.size() - 1];
}

Branch trace_branch(const ModelSpec& model, double rho0_min, double rho0_max, int points,
                    const IntegratorConfig& cfg, const SweepOptions& opts) {
  if (!(rho0_min > 0.0) || !(rho0_max > rho0_min))
    throw PreconditionError("trace_branch needs 0 < rho0_min < rho0_max");
  if (points < 2) throw PreconditionError("trace_branch needs at least 2 points");
  cfg.validate();

  const Eigen::VectorXd grid =
      Eigen::VectorXd::LinSpaced(points, std::log(rho0_min), std::log(rho0_max)).array().exp();

  struct Slot {
    bool ok = false;
    BranchSample sample;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(points));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < slots.size(); i = next++) {
      const double rho0 = i == 0 ? rho0_min
                          : i + 1 == slots.size() ? rho0_max
                                                  : grid[static_cast<Eigen::Index>(i)];
      try {
        slots[i].sample = evaluate_point(model, rho0, cfg, opts.convention);
        slots[i].ok = true;
      } catch (const std::exception& e) {
        slots[i].sample.rho0 = rho0;
        slots[i].error = e.what();
      }
    }
  };
  {
    const int n_threads = std::min(sweep_threads(opts.threads), points);
    std::vector<std::jthread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  Branch branch;
  branch.model = model;
  branch.cfg = cfg;
  branch.convention = opts.convention;
  for (const Slot& slot : slots) {
    if (slot.ok) branch.samples.push_back(slot.sample);
    else branch.failures.push_back({slot.sample.rho0, slot.error});
  }
  if (10 * branch.failures.size() > slots.size()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << branch.failures.size() << " of " << slots.size()
        << " sweep points failed; first failing rho0:";
    for (std::size_t i = 0; i < std::min<std::size_t>(branch.failures.size(), 10); ++i)
      msg << ' ' << branch.failures[i].rho0;
    msg << " (" << branch.failures.front().message << ")";
    throw BranchError(msg.str());
  }
  return branch;
}

bool TurningPointSet::ordered() const {
  for (std::size_t i = 1; i < lower.size(); ++i)
    if (!(lower[i - 1].mass < lower[i].mass)) return false;
  for (std::size_t i = 1; i < upper.size(); ++i)
    if (!(upper[i - 1].mass > upper[i].mass)) return false;
  for (const auto& lo : lower)
    for (const auto& up : upper)
      if (!(lo.mass < up.mass)) return false;
  return true;
}

TurningPointSet detect_turning_points(const Branch& branch) {
  if (branch.samples.size() < 3) throw PreconditionError("turning points need >= 3 samples");
  check_grid(branch);

  TurningPointSet result;
  const auto& smp = branch.samples;
  for (std::size_t i = 1; i + 1 < smp.size(); ++i) {
    const double left = smp[i].mass - smp[i - 1].mass;
    const double right = smp[i + 1].mass - smp[i].mass;
    if (!(left * right < 0.0 || (left != 0.0 && right == 0.0))) continue;

    const double curvature = smp[i + 1].mass - 2.0 * smp[i].mass + smp[i - 1].mass;
    if (curvature == 0.0) continue;
    const bool is_max = curvature < 0.0;
    const double sign = is_max ? 1.0 : -1.0;

    const double ua = std::log(smp[i - 1].rho0);
    const double uc = std::log(smp[i].rho0);
    const double ub = std::log(smp[i + 1].rho0);
    const double fa = sign * smp[i - 1].mass, fc = sign * smp[i].mass, fb = sign * smp[i + 1].mass;

    // Parabola through the three grid points.
    double best_u = uc, best_f = fc;
    const double num = (uc - ua) * (uc - ua) * (fc - fb) - (uc - ub) * (uc - ub) * (fc - fa);
    const double den = (uc - ua) * (fc - fb) - (uc - ub) * (fc - fa);
    if (den != 0.0) {
      const double vertex = uc - 0.5 * num / den;
      if (vertex > ua && vertex < ub) {
        const double fv = sign * mass_at(branch.model, std::exp(vertex), branch.cfg);
        if (fv > best_f) {
          best_u = vertex;
          best_f = fv;
        }
      }
    }
    const auto [u, mass] = golden_extremum(branch.model, branch.cfg, sign, ua, best_u, best_f, ub);

    TurningPoint tp;
    tp.mass = mass;
    tp.rho0 = std::exp(u);
    tp.rho0_lo = smp[i - 1].rho0;
    tp.rho0_hi = smp[i + 1].rho0;
    auto& seq = is_max ? result.upper : result.lower;
    tp.n = static_cast<int>(seq.size()) + 1;
    seq.push_back(tp);
  }
  return result;
}

double refine_root(const ModelSpec& model, double mass_target, double rho0_lo, double rho0_hi,
                   const IntegratorConfig& cfg, std::optional<double> mass_lo,
                   std::optional<double> mass_hi) {
  if (!(rho0_lo > 0.0) || !(rho0_hi > rho0_lo))
    throw PreconditionError("refine_root needs a non-degenerate bracket 0 < lo < hi");
  auto g = [&](double u) { return mass_at(model, std::exp(u), cfg) - mass_target; };
  const double ua = std::log(rho0_lo), ub = std::log(rho0_hi);
  const double ga = mass_lo ? *mass_lo - mass_target : g(ua);
  const double gb = mass_hi ? *mass_hi - mass_target : g(ub);
  if (ga == 0.0) return rho0_lo;
  if (gb == 0.0) return rho0_hi;
  if (ga * gb > 0.0) throw PreconditionError("refine_root: M - target has no sign change");

  std::uintmax_t max_iter = 200;
  auto done = [](double a, double b) { return std::abs(b - a) <= 1e-8; };
  const auto [a, b] = boost::math::tools::toms748_solve(g, ua, ub, ga, gb, done, max_iter);
  const double root = std::exp(0.5 * (a + b));

  const double residual = std::abs(g(std::log(root))) / mass_target;
  if (!(residual < 1e-6))
    throw AccuracyError("refine_root: residual " + std::to_string(residual) + " above 1e-6",
                        residual);
  return root;
}

SolutionCount count_solutions(const Branch& branch, double mass_target) {
  if (!(mass_target > 0.0)) throw DomainError("count_solutions: target mass must be > 0");
  check_grid(branch);

  SolutionCount out;
  const auto& smp = branch.samples;
  std::vector<double> roots;
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const double gi = smp[i].mass - mass_target;
    if (gi == 0.0) {
      roots.push_back(smp[i].rho0);
      continue;
    }
    if (i + 1 == smp.size()) break;
    const double gj = smp[i + 1].mass - mass_target;
    if (gi * gj >= 0.0) continue;
    try {
      roots.push_back(refine_root(branch.model, mass_target, smp[i].rho0, smp[i + 1].rho0,
                                  branch.cfg, smp[i].mass, smp[i + 1].mass));
    } catch (const std::exception&) {
      out.unresolved.emplace_back(smp[i].rho0, smp[i + 1].rho0);
      out.lower_bound = true;
    }
  }
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (out.roots.empty() || r > out.roots.back() * (1.0 + 1e-6)) out.roots.push_back(r);
  }
  out.count = static_cast<int>(out.roots.size());
  return out;
}

}  // namespace gravistat
