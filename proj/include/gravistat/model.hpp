#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gravistat/fermi.hpp"

namespace gravistat {

/// Statistics of the gas: Maxwell-Boltzmann, simplified Fermi-Dirac, Fermi-Dirac.
enum class Statistics { MB, sFD, FD };

std::string_view to_string(Statistics kind);
/// Parses "mb", "sfd", "fd" (case-insensitive).
Statistics parse_statistics(std::string_view name);

/// Immutable description of one gas model. Build it with make_model().
///
/// eta is the degeneracy parameter (0 for MB); mu is only meaningful for FD
/// and satisfies mu^2 eta^3 = 8/3.
struct ModelSpec {
  Statistics kind = Statistics::MB;
  double eta = 0.0;
  double mu = 0.0;
  FermiEvalConfig fermi{};

  bool operator==(const ModelSpec&) const = default;
};

struct ThermoValues {
  double pressure;
  double entropy_density;
};

ModelSpec make_model(Statistics kind, double eta);

/// R(z) = 1 / H'(z).
double response(const ModelSpec& model, double z);
/// H(z), the enthalpy (chemical potential) as a function of density.
double enthalpy(const ModelSpec& model, double z);
/// F(t) = H^{-1}(t).
double inverse_enthalpy(const ModelSpec& model, double t);
/// Pressure P (P' = z H', P(0) = 0) and entropy density beta = z H - P.
ThermoValues thermo(const ModelSpec& model, double z);
/// S(z) = z - R(z), evaluated without cancellation.
double defect(const ModelSpec& model, double z);

/// Evaluates the model maps repeatedly along one trajectory. For FD it keeps
/// the previous root of f_{1/2}(t) = 2z/mu as the next Newton seed. Not
/// thread-safe; give each integration its own instance.
class ModelEvaluator {
 public:
  explicit ModelEvaluator(const ModelSpec& model) : model_(model) {}

  const ModelSpec& model() const { return model_; }

  double response(double z);
  double enthalpy(double z);
  double defect(double z);
  ThermoValues thermo(double z);

 private:
  double fd_level(double z);

  ModelSpec model_;
  std::optional<double> seed_;
};

}  // namespace gravistat
