// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gravistat/branch.hpp"
#include "gravistat/cli.hpp"
#include "gravistat/energetics.hpp"
#include "gravistat/fermi.hpp"
#include "gravistat/validation.hpp"
#include "oracles.hpp"

using namespace gravistat;

namespace {

const ModelSpec kMB = make_model(Statistics::MB, 0.0);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a / b - 1.0); }

// Branches shared between criteria.
struct Sweeps {
  Branch mb;       // MB over [1e-3, 1e10]
  Branch sfd_tiny; // sFD(1e-4) over [1e-3, 1e12]
  std::vector<Branch> matrix;
};

Sweeps& sweeps() {
  static Sweeps s = [] {
    Sweeps out;
    out.mb = trace_branch(kMB, 1e-3, 1e10, 2000);
    out.sfd_tiny = trace_branch(make_model(Statistics::sFD, 1e-4), 1e-3, 1e12, 2000);
    for (double eta : {1e-2, 5e-2})
      out.matrix.push_back(trace_branch(make_model(Statistics::sFD, eta), 1e-3, 1e10, 1000));
    // FD sweeps cost far more per point
    for (double eta : {1e-2, 1e-1})
      out.matrix.push_back(trace_branch(make_model(Statistics::FD, eta), 1e-3, 1e8, 150));
    return out;
  }();
  return s;
}

void criterion1(Outcome& o) {
  const double a = std::abs(fermi_eval(FermiOrder::half, 0.0) - oracle::fermi_at_zero(0.5));
  const double b = std::abs(fermi_eval(FermiOrder::minus_half, 0.0) - oracle::fermi_at_zero(-0.5));
  o.require(a <= 1e-8, "f_{1/2}(0)");
  o.require(b <= 1e-8, "f_{-1/2}(0)");
  int bad = 0;
  const auto grid = oracle::signed_log_grid(40.0, 1000);
  for (double z : grid)
    if (!(fermi_eval(FermiOrder::minus_half, z) <= 2.0 * fermi_eval(FermiOrder::half, z))) ++bad;
  o.require(bad == 0, "f_{-1/2} <= 2 f_{1/2}");
  o.detail << "|err f_1/2(0)| = " << a << ", |err f_-1/2(0)| = " << b << ", inequality violations "
           << bad << "/" << grid.size();
}

void criterion2(Outcome& o) {
  const auto zs = oracle::logspace(1e-3, 1e6, 1000);
  double worst_closed = 0.0, worst_ratio = 0.0;
  int bad = 0;
  for (double eta : {1e-4, 1e-2, 1e-1}) {
    const auto sfd = make_model(Statistics::sFD, eta);
    const auto fd = make_model(Statistics::FD, eta);
    ModelEvaluator fd_eval(fd);
    for (double z : zs) {
      const double bound = eta * std::pow(z, 5.0 / 3.0);
      const double s = defect(sfd, z);
      worst_closed = std::max(worst_closed, rel(s, bound / (1.0 + eta * std::pow(z, 2.0 / 3.0))));
      if (!(s >= 0.0 && s <= bound)) ++bad;
      const double f = fd_eval.defect(z);
      if (!(f >= 0.0 && f <= oracle::kDefectConstant * bound)) ++bad;
      worst_ratio = std::max(worst_ratio, f / bound);
    }
  }
  o.require(worst_closed <= 1e-12, "sFD closed form");
  o.require(bad == 0, "defect bounds");
  o.detail << "sFD closed-form rel err " << worst_closed << ", bound violations " << bad
           << ", FD sup ratio " << worst_ratio << " vs C_est " << oracle::kDefectConstant;
}

void criterion3(Outcome& o) {
  const auto matrix = run_standard_matrix({}, 1e-7);
  double worst = INFINITY;
  int failed = 0;
  for (const auto& e : matrix) {
    if (!e.error.empty()) ++failed;
    for (const auto& r : e.reports) {
      worst = std::min(worst, r.worst_margin);
      if (!r.passed || !(r.worst_margin >= -1e-7)) ++failed;
    }
  }
  o.require(failed == 0, "matrix checks");
  o.detail << matrix.size() << " trajectories, failed checks " << failed << ", worst margin " << worst;
}

void criterion4(Outcome& o) {
  double worst = INFINITY;
  for (double eta : {1e-3, 1e-4}) {
    for (double rho0 : {0.5, 1.0, 2.0}) {
      const double d = trajectory_distance(make_model(Statistics::sFD, eta), rho0);
      const double bound = gronwall_bound(eta, rho0);
      o.require(d <= bound, "eta=" + std::to_string(eta) + " rho0=" + std::to_string(rho0));
      worst = std::min(worst, (bound - d) / bound);
    }
  }
  o.detail << "smallest relative headroom " << worst;
}

void criterion5(Outcome& o) {
  auto& s = sweeps();
  std::vector<const Branch*> all = {&s.mb, &s.sfd_tiny};
  for (const auto& b : s.matrix) all.push_back(&b);
  std::size_t samples = 0, failed = 0;
  double worst = INFINITY;
  for (const Branch* b : all) {
    samples += b->samples.size();
    failed += b->failures.size();
    const std::string label =
        std::string(to_string(b->model.kind)) + " eta=" + std::to_string(b->model.eta);
    for (const auto& r : check_branch_mass_estimates(*b, 1e-8)) {
      o.require(r.passed, label + ": " + r.name);
      worst = std::min(worst, r.worst_margin);
    }
  }
  o.detail << all.size() << " branches, " << samples << " samples (" << failed
           << " failed points), worst slack " << worst;
}

void criterion6(Outcome& o) {
  for (const auto& m : {kMB, make_model(Statistics::sFD, 0.1)}) {
    const double mm = reconstruct_profile(integrate(m, 1e-4)).normalized_mass();
    const double err = std::abs(3.0 * mm / 1e-4 - 1.0);
    o.require(err < 1e-3, std::string(to_string(m.kind)));
    o.detail << to_string(m.kind) << " |3m/rho0 - 1| = " << err << "  ";
  }
}

void criterion7(Outcome& o) {
  const double m8 = reconstruct_profile(integrate(kMB, 1e8)).normalized_mass();
  o.require(std::abs(m8 - 2.0) < 0.05, "m(1e8)");
  const auto t = detect_turning_points(sweeps().mb);
  const double eight_pi = 8.0 * M_PI;
  const bool enough = t.upper.size() >= 2 && t.lower.size() >= 2;
  o.require(enough, "two pairs of turning points");
  o.require(t.ordered(), "ordering M*1 > M*2 > ... > M_*2 > M_*1");
  if (enough) {
    o.require(std::abs(t.upper[1].mass - eight_pi) < std::abs(t.upper[0].mass - eight_pi),
              "upper turns approach 8 pi");
    o.require(std::abs(t.lower[1].mass - eight_pi) < std::abs(t.lower[0].mass - eight_pi),
              "lower turns approach 8 pi");
    o.require(t.upper[1].mass > eight_pi && t.lower[1].mass < eight_pi, "turns bracket 8 pi");
    o.detail << "m(1e8) = " << m8 << ", M*1 = " << t.upper[0].mass << ", M*2 = " << t.upper[1].mass
             << ", M_*1 = " << t.lower[0].mass << ", M_*2 = " << t.lower[1].mass;
  }
}

void criterion8(Outcome& o) {
  const auto t = detect_turning_points(sweeps().mb);
  if (t.lower.size() < 2 || t.upper.empty()) {
    o.require(false, "MB turning points");
    return;
  }
  const double mid = 0.5 * (t.lower[0].mass + t.lower[1].mass);
  const auto sfd = count_solutions(sweeps().sfd_tiny, mid);
  const auto below = count_solutions(sweeps().mb, 0.9 * t.lower[0].mass);
  const auto above = count_solutions(sweeps().mb, 1.01 * t.upper[0].mass);
  o.require(sfd.count >= 2, "sFD(1e-4) count >= 2");
  o.require(below.count == 1, "MB below M_*1");
  o.require(above.count == 0, "MB above M*1");
  o.detail << "M = " << mid << ": sFD(1e-4) count " << sfd.count << "; MB counts " << below.count
           << " (M = " << 0.9 * t.lower[0].mass << "), " << above.count
           << " (M = " << 1.01 * t.upper[0].mass << ")";
}

void criterion9(Outcome& o) {
  double prev = INFINITY;
  for (double eta : {0.05, 0.03, 0.01, 0.002, 0.001, 0.0005}) {
    const double d = trajectory_distance(make_model(Statistics::sFD, eta), 1.0);
    o.require(d < prev, "eta=" + std::to_string(eta));
    o.detail << d << ' ';
    prev = d;
  }
}

void criterion10(Outcome& o) {
  double eps_worst = 0.0, dual_worst = 0.0, energy_worst = 0.0;
  IntegratorConfig finer_eps, finer_grid;
  finer_eps.eps_cut = 1e-7;
  finer_grid.dense_samples = 4000;
  for (const auto& m : {kMB, make_model(Statistics::sFD, 0.01), make_model(Statistics::FD, 0.1)}) {
    for (double rho0 : {1e-2, 1.0, 1e2, 1e5}) {
      const auto base = integrate(m, rho0);
      const double a = reconstruct_profile(base).mass();
      const double b = reconstruct_profile(integrate(m, rho0, finer_eps)).mass();
      eps_worst = std::max(eps_worst, rel(a, b));

      const auto xy = integrate_xy(m, rho0);
      const double scale = std::max(1.0, base.y.cwiseAbs().maxCoeff());
      dual_worst = std::max({dual_worst, (base.x - xy.x).cwiseAbs().maxCoeff() / scale,
                             (base.y - xy.y).cwiseAbs().maxCoeff() / scale});

      const auto e1 = free_energy(m, base);
      const auto e2 = free_energy(m, integrate(m, rho0, finer_grid));
      energy_worst = std::max({energy_worst, rel(e1.entropy, e2.entropy),
                               rel(e1.potential, e2.potential)});
    }
  }
  o.require(eps_worst < 1e-4, "eps robustness");
  o.require(dual_worst <= 1e-8, "dual form");
  o.require(energy_worst <= 1e-6, "energy quadrature");

  const std::vector<std::vector<std::string>> commands = {
      {"trace", "--model", "sfd", "--eta", "0.01", "--rho0-max", "1e8", "--points", "300"},
      {"turning-points", "--model", "mb", "--points", "800"},
      {"count", "--model", "mb", "--mass", "25.13274", "--points", "800"},
      {"energy", "--model", "fd", "--eta", "0.1", "--rho0", "50"},
      {"diagram", "--model", "sfd", "--etas", "0.01", "--with-mb", "--rho0-max", "1e8", "--points",
       "200"}};
  int mismatched = 0;
  for (const auto& args : commands) {
    std::ostringstream a, b, err;
    const int s1 = run_command(args, a, err);
    const int s2 = run_command(args, b, err);
    if (s1 != 0 || s2 != 0 || a.str() != b.str() || a.str().empty()) ++mismatched;
  }
  o.require(mismatched == 0, "byte-identical reruns");
  o.detail << "eps rel change " << eps_worst << ", dual-form " << dual_worst << ", energy "
           << energy_worst << ", rerun mismatches " << mismatched << "/" << commands.size();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"Fermi oracle agreement", criterion1},
      {"defect bounds", criterion2},
      {"trajectory invariants on the standard matrix", criterion3},
      {"Gronwall bound", criterion4},
      {"mass estimates along traced branches", criterion5},
      {"small-mass law", criterion6},
      {"MB spiral focus and turning points", criterion7},
      {"multiplicity at desk scale", criterion8},
      {"eta-continuity", criterion9},
      {"numerical hygiene", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("criterion %zu %s: %s (%.1fs) %s\n", i + 1, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
