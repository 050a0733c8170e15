#include "gravistat/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gravistat/branch.hpp"
#include "gravistat/fermi.hpp"
#include "gravistat/io.hpp"
#include "gravistat/shooting.hpp"
#include "gravistat/validation.hpp"

namespace gravistat {

namespace {

using nlohmann::json;

/// Everything a subcommand may need; defaults reproduce eps = 1e-6 and the
/// default sweep range.
struct RunConfig {
  std::string model = "mb";
  double eta = 0.0;
  IntegratorConfig integrator;
  double rho0 = 1.0;
  double rho0_min = 1e-3;
  double rho0_max = 1e10;
  int points = 2000;
  int threads = 0;
  bool four_pi_potential = false;
  std::string out;
  std::string json_out;

  ModelSpec make() const { return make_model(parse_statistics(model), eta); }
  SweepOptions sweep() const {
    return {threads, four_pi_potential ? PotentialConvention::FourPi : PotentialConvention::Definition};
  }
};

void add_model_options(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--model", rc.model, "Statistics: mb, sfd or fd")->capture_default_str();
  sub->add_option("--eta", rc.eta, "Degeneracy parameter eta (0 for mb)")->capture_default_str();
  sub->add_option("--eps", rc.integrator.eps_cut, "Truncation level eps of the initial data")
      ->capture_default_str();
  sub->add_option("--abs-tol", rc.integrator.abs_tol, "Integrator absolute tolerance")
      ->capture_default_str();
  sub->add_option("--rel-tol", rc.integrator.rel_tol, "Integrator relative tolerance")
      ->capture_default_str();
  sub->add_option("--max-steps", rc.integrator.max_steps, "Integrator step budget")
      ->capture_default_str();
  sub->add_option("--samples", rc.integrator.dense_samples, "Dense output samples")
      ->capture_default_str();
}

void add_sweep_options(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--rho0-min", rc.rho0_min, "Smallest central density")->capture_default_str();
  sub->add_option("--rho0-max", rc.rho0_max, "Largest central density")->capture_default_str();
  sub->add_option("--points", rc.points, "Number of log-spaced central densities")
      ->capture_default_str();
  sub->add_option("--threads", rc.threads, "Worker threads (default: GRAVISTAT_THREADS or all)");
  sub->add_flag("--four-pi-potential", rc.four_pi_potential,
                "Use the 4 pi prefactor for the potential energy");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << content;
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << file.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) out << content;
  else write_file(path, content);
}

void report_failures(const Branch& branch, std::ostream& err) {
  for (const auto& f : branch.failures)
    err << "warning: rho0 = " << format_number(f.rho0) << " failed: " << f.message << '\n';
}

std::optional<DiagramKind> parse_kind(const std::string& name) {
  static const std::map<std::string, DiagramKind> kinds = {
      {"bifurcation", DiagramKind::Bifurcation},
      {"entropy", DiagramKind::Entropy},
      {"potential", DiagramKind::Potential},
      {"free-energy", DiagramKind::FreeEnergy}};
  const auto it = kinds.find(name);
  if (it == kinds.end()) return std::nullopt;
  return it->second;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial equilibria of self-gravitating gases: shooting, branches, turning points"};
  app.set_config("--config", "", "TOML-style file supplying option values");
  app.require_subcommand(1);

  RunConfig rc;

  // fermi
  auto* fermi = app.add_subcommand("fermi", "Evaluate f_alpha(z), its derivative or inverse");
  double order = 0.5, z = 0.0;
  std::optional<double> inverse_of;
  bool derivative = false;
  fermi->add_option("--order", order, "alpha in {-0.5, 0.5, 1.5}")->capture_default_str();
  fermi->add_option("--z", z, "Argument z")->capture_default_str();
  fermi->add_flag("--derivative", derivative, "Print d/dz f_alpha(z) instead");
  fermi->add_option("--inverse", inverse_of, "Print z with f_{1/2}(z) = value");

  // solve
  auto* solve = app.add_subcommand("solve", "Integrate one solution and report its profile");
  add_model_options(solve, rc);
  solve->add_option("--rho0", rc.rho0, "Central density")->capture_default_str();
  solve->add_flag("--four-pi-potential", rc.four_pi_potential,
                  "Use the 4 pi prefactor for the potential energy");
  std::string profile_out;
  int profile_points = 200;
  solve->add_option("--profile-out", profile_out, "CSV file for r, rho(r), phi(r)");
  solve->add_option("--profile-points", profile_points, "Rows in the profile CSV")
      ->capture_default_str();
  solve->add_option("--out", rc.out, "Write the JSON summary here instead of stdout");

  // trace
  auto* trace = app.add_subcommand("trace", "Sweep the branch over a rho0 grid");
  add_model_options(trace, rc);
  add_sweep_options(trace, rc);
  trace->add_option("--out", rc.out, "CSV output (stdout if omitted)");
  trace->add_option("--json", rc.json_out, "Also write the branch as JSON");

  // turning-points
  auto* turning = app.add_subcommand("turning-points", "Locate the extrema of M along the branch");
  add_model_options(turning, rc);
  add_sweep_options(turning, rc);
  turning->add_option("--out", rc.out, "JSON output (stdout if omitted)");

  // count
  auto* count = app.add_subcommand("count", "Count solutions with a prescribed mass M");
  add_model_options(count, rc);
  add_sweep_options(count, rc);
  double mass_target = 0.0;
  count->add_option("--mass", mass_target, "Target mass M (= 4 pi m)")->required();
  count->add_option("--out", rc.out, "JSON output (stdout if omitted)");

  // energy
  auto* energy = app.add_subcommand("energy", "Entropy, potential and free energy of one solution");
  add_model_options(energy, rc);
  energy->add_option("--rho0", rc.rho0, "Central density")->capture_default_str();
  energy->add_flag("--four-pi-potential", rc.four_pi_potential,
                   "Use the 4 pi prefactor for the potential energy");
  energy->add_option("--out", rc.out, "JSON output (stdout if omitted)");

  // validate
  auto* validate = app.add_subcommand("validate", "Run the invariant checks on the standard matrix");
  double tolerance = 1e-8;
  validate->add_option("--tolerance", tolerance, "Allowed negative slack")->capture_default_str();
  validate->add_option("--threads", rc.threads, "Worker threads");
  validate->add_option("--out", rc.out, "JSON output (stdout if omitted)");

  // diagram
  auto* diagram = app.add_subcommand("diagram", "Emit an SVG bifurcation or energy diagram");
  add_model_options(diagram, rc);
  add_sweep_options(diagram, rc);
  std::vector<std::string> inputs;
  std::vector<double> etas;
  std::string kind_name = "bifurcation";
  bool log100 = false;
  bool with_mb = false;
  diagram->add_option("--input", inputs, "Branch JSON files written by `trace --json`");
  diagram->add_option("--etas", etas, "Trace one branch per eta for --model (comma separated)")
      ->delimiter(',');
  diagram->add_flag("--with-mb", with_mb, "Also trace the eta = 0 (MB) branch");
  diagram->add_option("--kind", kind_name, "bifurcation, entropy, potential or free-energy")
      ->capture_default_str();
  diagram->add_flag("--log100", log100, "Energy ordinate as log(100 + value)");
  diagram->add_option("--out", rc.out, "SVG output (stdout if omitted)");

  // --config is a root option; accept it after the subcommand too.
  std::vector<std::string> ordered, rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      ordered.push_back(args[i]);
      ordered.push_back(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      ordered.push_back(args[i]);
    } else {
      rest.push_back(args[i]);
    }
  }
  ordered.insert(ordered.end(), rest.begin(), rest.end());

  std::vector<const char*> argv;
  argv.push_back("gravistat");
  for (const auto& a : ordered) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*fermi) {
      const FermiOrder fo = FermiOrder::from_alpha(order);
      double value;
      if (inverse_of) value = fermi_inverse_half(*inverse_of);
      else if (derivative) value = fermi_derivative(fo, z);
      else value = fermi_eval(fo, z);
      out << format_number(value) << '\n';
      return 0;
    }

    if (*solve || *energy) {
      const ModelSpec model = rc.make();
      const Trajectory traj = integrate(model, rc.rho0, rc.integrator);
      const SolutionProfile profile(traj);
      const auto convention =
          rc.four_pi_potential ? PotentialConvention::FourPi : PotentialConvention::Definition;
      const EnergyReport report = free_energy(model, traj, convention);
      json j;
      if (*energy) {
        j = to_json(report);
      } else {
        j = {{"model", to_json(model)},
             {"rho0", rc.rho0},
             {"t_start", traj.t_start},
             {"mass", profile.mass()},
             {"m", profile.normalized_mass()},
             {"sup_density", profile.sup_density()},
             {"lambda", profile.lambda()},
             {"boundary_density", profile.boundary_density()},
             {"energy", to_json(report)},
             {"steps", {{"accepted", traj.stats.accepted},
                        {"rejected", traj.stats.rejected},
                        {"rhs_evals", traj.stats.rhs_evals},
                        {"clamped", traj.stats.clamped},
                        {"eps_used", traj.stats.eps_used}}}};
        if (!profile_out.empty()) {
          std::string csv = "r,rho,phi\r\n";
          const double r0 = std::exp(traj.t_start);
          for (int k = 0; k < profile_points; ++k) {
            const double r =
                profile_points == 1
                    ? 1.0
                    : std::exp(std::log(r0) * (1.0 - double(k) / (profile_points - 1)));
            csv += format_number(r) + ',' + format_number(profile.density(r)) + ',' +
                   format_number(profile.potential(r)) + "\r\n";
          }
          write_file(profile_out, csv);
        }
      }
      emit(rc.out, j.dump(2) + "\n", out);
      return 0;
    }

    if (*trace) {
      const Branch branch =
          trace_branch(rc.make(), rc.rho0_min, rc.rho0_max, rc.points, rc.integrator, rc.sweep());
      report_failures(branch, err);
      emit(rc.out, branch_to_csv(branch), out);
      if (!rc.json_out.empty()) write_file(rc.json_out, to_json(branch).dump(2) + "\n");
      return 0;
    }

    if (*turning) {
      const Branch branch =
          trace_branch(rc.make(), rc.rho0_min, rc.rho0_max, rc.points, rc.integrator, rc.sweep());
      report_failures(branch, err);
      emit(rc.out, to_json(detect_turning_points(branch)).dump(2) + "\n", out);
      return 0;
    }

    if (*count) {
      const Branch branch =
          trace_branch(rc.make(), rc.rho0_min, rc.rho0_max, rc.points, rc.integrator, rc.sweep());
      report_failures(branch, err);
      json j = to_json(count_solutions(branch, mass_target));
      j["mass"] = mass_target;
      emit(rc.out, j.dump(2) + "\n", out);
      return 0;
    }

    if (*validate) {
      const json j = to_json(run_standard_matrix(rc.integrator, tolerance, rc.threads));
      emit(rc.out, j.dump(2) + "\n", out);
      return j.at("passed").get<bool>() ? 0 : 1;
    }

    if (*diagram) {
      const auto kind = parse_kind(kind_name);
      if (!kind) throw PreconditionError("unknown diagram kind '" + kind_name + "'");
      std::vector<Branch> branches;
      for (const auto& path : inputs) branches.push_back(branch_from_json(json::parse(read_file(path))));
      if (with_mb) {
        branches.push_back(trace_branch(make_model(Statistics::MB, 0.0), rc.rho0_min, rc.rho0_max,
                                        rc.points, rc.integrator, rc.sweep()));
      }
      const Statistics kind_of_model = parse_statistics(rc.model);
      for (double eta : etas) {
        branches.push_back(trace_branch(make_model(kind_of_model, eta), rc.rho0_min, rc.rho0_max,
                                        rc.points, rc.integrator, rc.sweep()));
      }
      if (branches.empty()) {
        branches.push_back(
            trace_branch(rc.make(), rc.rho0_min, rc.rho0_max, rc.points, rc.integrator, rc.sweep()));
      }
      for (const auto& b : branches) report_failures(b, err);
      DiagramStyle style;
      style.kind = *kind;
      style.log100 = log100;
      emit(rc.out, emit_diagram(branches, style), out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gravistat
