#include "gravistat/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "gravistat/errors.hpp"

namespace gravistat {

namespace {

void require_positive(double z, const char* what) {
  if (!(z > 0.0) || !std::isfinite(z))
    throw DomainError(std::string(what) + ": density argument must be finite and > 0");
}

// Unique root of log z + (3/2) eta z^{2/3} = t, solved in u = log z where the
// residual is increasing and convex.
double sfd_inverse_enthalpy(double eta, double t) {
  // Root in u = log z of h(u) = u + 1.5 eta e^{2u/3} - t, which is increasing
  // and convex. Both u = t and u = 1.5 log(2t / (3 eta)) (when nonnegative)
  // lie right of the root, so Newton from the smaller one descends monotonically.
  auto h = [eta, t](double u) { return u + 1.5 * eta * std::exp(2.0 * u / 3.0) - t; };
  double hi = t;
  if (t > 0.0) {
    const double u = 1.5 * std::log(2.0 * t / (3.0 * eta));
    if (u >= 0.0) hi = std::min(hi, u);
  }
  double lo = hi - 1.0;
  while (h(lo) > 0.0) lo -= 2.0 * (hi - lo);

  double u = hi;
  for (int it = 0; it < 200; ++it) {
    const double e = 1.5 * eta * std::exp(2.0 * u / 3.0);
    const double g = u + e - t;
    if (std::abs(g) <= 4e-16 * (std::abs(u) + e + std::abs(t))) break;
    if (g > 0.0) hi = u;
    else lo = u;
    double next = u - g / (1.0 + 2.0 / 3.0 * e);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(u)) || next == u) break;
    u = next;
  }
  return std::exp(u);
}

}  // namespace

std::string_view to_string(Statistics kind) {
  switch (kind) {
    case Statistics::MB: return "mb";
    case Statistics::sFD: return "sfd";
    case Statistics::FD: return "fd";
  }
  return "?";
}

Statistics parse_statistics(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "mb") return Statistics::MB;
  if (lower == "sfd") return Statistics::sFD;
  if (lower == "fd") return Statistics::FD;
  throw PreconditionError("unknown statistics '" + std::string(name) + "' (expected mb, sfd or fd)");
}

ModelSpec make_model(Statistics kind, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("eta must be finite and >= 0");
  ModelSpec model;
  model.kind = kind;
  model.eta = eta;
  switch (kind) {
    case Statistics::MB:
      if (eta != 0.0) throw DomainError("MB statistics require eta = 0");
      break;
    case Statistics::sFD:
      break;
    case Statistics::FD:
      if (eta == 0.0) throw DomainError("FD statistics require eta > 0 (mu is undefined)");
      model.mu = std::sqrt(8.0 / (3.0 * eta * eta * eta));
      break;
  }
  return model;
}

double ModelEvaluator::fd_level(double z) {
  const double level = fermi_inverse_half(2.0 * z / model_.mu, model_.fermi, seed_);
  seed_ = level;
  return level;
}

double ModelEvaluator::response(double z) {
  require_positive(z, "response");
  switch (model_.kind) {
    case Statistics::MB:
      return z;
    case Statistics::sFD:
      return z / (1.0 + model_.eta * std::cbrt(z * z));
    case Statistics::FD: {
      const double level = fd_level(z);
      const double excess = 0.5 * model_.mu * fermi_half_excess(level, model_.fermi);
      if (excess <= 0.5 * z) return z - excess;
      return 0.25 * model_.mu * fermi_eval(FermiOrder::minus_half, level, model_.fermi);
    }
  }
  return z;
}

double ModelEvaluator::enthalpy(double z) {
  require_positive(z, "enthalpy");
  switch (model_.kind) {
    case Statistics::MB:
      return std::log(z);
    case Statistics::sFD:
      return std::log(z) + 1.5 * model_.eta * std::cbrt(z * z);
    case Statistics::FD:
      return fd_level(z);
  }
  return 0.0;
}

double ModelEvaluator::defect(double z) {
  require_positive(z, "defect");
  switch (model_.kind) {
    case Statistics::MB:
      return 0.0;
    case Statistics::sFD: {
      const double z23 = std::cbrt(z * z);
      return model_.eta * z * z23 / (1.0 + model_.eta * z23);
    }
    case Statistics::FD:
      return 0.5 * model_.mu * fermi_half_excess(fd_level(z), model_.fermi);
  }
  return 0.0;
}

ThermoValues ModelEvaluator::thermo(double z) {
  require_positive(z, "thermo");
  switch (model_.kind) {
    case Statistics::MB:
      return {z, z * std::log(z) - z};
    case Statistics::sFD: {
      const double z53 = z * std::cbrt(z * z);
      return {z + 0.6 * model_.eta * z53, z * std::log(z) - z + 0.9 * model_.eta * z53};
    }
    case Statistics::FD: {
      const double level = fd_level(z);
      const double pressure =
          model_.mu / 3.0 * fermi_eval(FermiOrder::three_halves, level, model_.fermi);
      return {pressure, z * level - pressure};
    }
  }
  return {0.0, 0.0};
}

double response(const ModelSpec& model, double z) { return ModelEvaluator(model).response(z); }
double enthalpy(const ModelSpec& model, double z) { return ModelEvaluator(model).enthalpy(z); }
double defect(const ModelSpec& model, double z) { return ModelEvaluator(model).defect(z); }
ThermoValues thermo(const ModelSpec& model, double z) { return ModelEvaluator(model).thermo(z); }

double inverse_enthalpy(const ModelSpec& model, double t) {
  if (!std::isfinite(t)) throw DomainError("inverse_enthalpy: argument must be finite");
  switch (model.kind) {
    case Statistics::MB:
      return std::exp(t);
    case Statistics::sFD:
      return model.eta == 0.0 ? std::exp(t) : sfd_inverse_enthalpy(model.eta, t);
    case Statistics::FD:
      return 0.5 * model.mu * fermi_eval(FermiOrder::half, t, model.fermi);
  }
  return 0.0;
}

}  // namespace gravistat
