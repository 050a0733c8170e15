#include "gravistat/fermi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gravistat/errors.hpp"

namespace gravistat {

namespace {

constexpr double kSeriesThreshold = -25.0;
constexpr double kEdgeWidth = 40.0;  // e^{-40} below double precision

// Largest power of two depth that keeps the number of leaf intervals at or
// below max_subdivisions.
unsigned depth_for(int max_subdivisions) {
  unsigned depth = 0;
  while ((2 << depth) <= max_subdivisions && depth < 30) ++depth;
  return std::max(depth, 1u);
}

// 1 / (1 + e^w) without overflow.
double logistic_tail(double w) {
  if (w > 0.0) {
    const double e = std::exp(-w);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(w));
}

struct Accumulated {
  double value = 0.0;
  double error = 0.0;
};

// Error target used to steer both the quadrature and the tail cut. Relative
// accuracy is preferred whenever the caller asks for any, because the FD
// model feeds these values through logarithms.
double steering_tolerance(const FermiEvalConfig& cfg, double lower_bound) {
  if (cfg.rel_tol > 0.0) return cfg.rel_tol * lower_bound;
  return cfg.abs_tol;
}

// sum_{k>=k0} sign_k * weight_k * e^{kz} k^{-power}; terms decay geometrically for z < 0.
template <typename Weight>
double alternating_series(double z, double power, int first, Weight weight, double rel) {
  double sum = 0.0;
  for (int k = first; k < 100000; ++k) {
    const double term = weight(k) * std::exp(k * z) * std::pow(double(k), -power);
    sum += (k % 2 == 1) ? term : -term;
    if (std::abs(term) < 0.1 * rel * std::abs(sum)) break;
  }
  return sum;
}

// int_0^inf x^alpha occ(x - z) dx for a decreasing occupation factor occ.
// The head uses x = u^2, which removes the x^{-1/2} endpoint singularity. The
// Fermi edge and the tail are integrated in w = x - z: written as u^2 - z the
// argument loses ~log10(z) digits to cancellation.
template <typename Occupation>
double split_quadrature(Occupation occ, double z, double alpha, double lower_bound,
                        const FermiEvalConfig& cfg) {
  using boost::math::quadrature::gauss_kronrod;

  const double zp = std::max(z, 0.0);
  const double cut = 0.1 * steering_tolerance(cfg, lower_bound);

  // Tail bound: int_X^inf x^alpha e^{z-x} dx <= 2 X^alpha e^{z-X} for X >= 2|alpha|.
  double upper = zp + 1.0;
  for (int it = 0; it < 4; ++it) {
    const double excess = std::log(2.0 * std::pow(upper, alpha) / cut) + (z - zp);
    upper = zp + std::max(excess, 1.0);
  }

  const unsigned depth = depth_for(cfg.max_subdivisions);
  const double rel = std::clamp(0.1 * cfg.rel_tol, 1e-15, 1e-6);

  const double power = 2.0 * alpha + 1.0;
  auto in_u = [&](double u) {
    const double weight = power == 0.0 ? 2.0 : 2.0 * std::pow(u, power);
    return weight * occ(u * u - z);
  };
  auto in_w = [&](double w) { return std::pow(z + w, alpha) * occ(w); };

  Accumulated acc;
  auto piece = [&](auto f, double a, double b) {
    if (b <= a) return;
    double err = 0.0;
    acc.value += gauss_kronrod<double, 21>::integrate(f, a, b, depth, rel, &err);
    acc.error += err;
  };
  if (zp > 2.0 * kEdgeWidth) {
    piece(in_u, 0.0, std::sqrt(zp - kEdgeWidth));
    piece(in_w, -kEdgeWidth, 0.0);
    piece(in_w, 0.0, upper - z);
  } else {
    piece(in_u, 0.0, std::sqrt(zp));
    piece(in_u, std::sqrt(zp), std::sqrt(upper));
  }

  const double allowed = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(acc.value));
  if (!(acc.error <= allowed)) {
    throw AccuracyError("Fermi integral did not converge within " +
                            std::to_string(cfg.max_subdivisions) + " subdivisions",
                        acc.error);
  }
  return acc.value;
}

void check_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("Fermi integral argument must be finite");
}

}  // namespace

FermiOrder FermiOrder::from_alpha(double alpha) {
  if (alpha == -0.5) return Value::MinusHalf;
  if (alpha == 0.5) return Value::Half;
  if (alpha == 1.5) return Value::ThreeHalves;
  throw DomainError("unsupported Fermi order " + std::to_string(alpha) +
                    " (expected -1/2, 1/2 or 3/2)");
}

void FermiEvalConfig::validate() const {
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || !(abs_tol + rel_tol > 0.0))
    throw PreconditionError("FermiEvalConfig: tolerances must be >= 0 with a positive sum");
  if (max_subdivisions <= 0)
    throw PreconditionError("FermiEvalConfig: max_subdivisions must be positive");
}

double fermi_eval(FermiOrder order, double z, const FermiEvalConfig& cfg) {
  check_finite(z);
  cfg.validate();
  const double alpha = order.alpha();
  const double gamma = std::tgamma(alpha + 1.0);

  if (z < kSeriesThreshold) {
    const double rel = std::max(cfg.rel_tol, 1e-16);
    return gamma * alternating_series(z, alpha + 1.0, 1, [](int) { return 1.0; }, rel);
  }

  // f_alpha(z) >= Gamma(alpha + 1) e^z / (1 + e^z).
  const double lower_bound = gamma * logistic_tail(-z);
  return split_quadrature(logistic_tail, z, alpha, lower_bound, cfg);
}

double fermi_derivative(FermiOrder order, double z, const FermiEvalConfig& cfg) {
  switch (order.value()) {
    case FermiOrder::Value::Half:
      return 0.5 * fermi_eval(FermiOrder::minus_half, z, cfg);
    case FermiOrder::Value::ThreeHalves:
      return 1.5 * fermi_eval(FermiOrder::half, z, cfg);
    case FermiOrder::Value::MinusHalf:
      break;
  }
  throw DomainError("derivative of f_{-1/2} needs f_{-3/2}, which is not supported");
}

double fermi_half_excess(double z, const FermiEvalConfig& cfg) {
  check_finite(z);
  cfg.validate();
  const double gamma = std::tgamma(1.5);

  if (z < kSeriesThreshold) {
    // (1 + w)^{-2} w^2 = sum_{k>=2} (-1)^k (k - 1) w^k with w = e^{z - x}.
    const double rel = std::max(cfg.rel_tol, 1e-16);
    return -gamma *
           alternating_series(z, 1.5, 2, [](int k) { return double(k - 1); }, rel);
  }

  auto occupation = [](double w) {
    const double l = logistic_tail(w);
    return l * l;
  };
  // Leading Boltzmann term Gamma(3/2) e^{2z} 2^{-3/2} damped by the same logistic factor.
  const double e = logistic_tail(-z);
  const double lower_bound = gamma * e * e / std::pow(2.0, 1.5);
  return split_quadrature(occupation, z, 0.5, lower_bound, cfg);
}

double fermi_inverse_half(double v, const FermiEvalConfig& cfg, std::optional<double> seed) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError("fermi_inverse_half requires a finite v > 0");
  cfg.validate();

  // Rigorous bracket: f_{1/2}(z) <= Gamma(3/2) e^z everywhere and
  // f_{1/2}(z) >= z^{3/2} / 3 for z > 0.
  const double log_v = std::log(v);
  double lo = log_v - std::log(std::tgamma(1.5));
  double hi = std::max(std::cbrt(9.0 * v * v), lo + 1.0);

  auto residual = [&](double z, double* slope) {
    const double f = fermi_eval(FermiOrder::half, z, cfg);
    if (slope) *slope = 0.5 * fermi_eval(FermiOrder::minus_half, z, cfg) / f;
    return std::log(f) - log_v;
  };

  double z;
  if (seed && *seed > lo && *seed < hi) {
    z = *seed;
  } else {
    z = v < 1.0 ? lo : std::clamp(std::cbrt(2.25 * v * v), lo, hi);
  }

  int failures = 0;
  double best = INFINITY;
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double g = residual(z, &slope);
    if (g == 0.0) return z;
    if (g > 0.0) hi = std::min(hi, z);
    else lo = std::max(lo, z);

    if (std::abs(g) < best) {
      best = std::abs(g);
    } else {
      ++failures;
    }

    double next = z - g / slope;
    const bool newton = failures < 3 && std::isfinite(next) && next > lo && next < hi;
    if (!newton) next = 0.5 * (lo + hi);
    const double scale = std::max(1.0, std::abs(next));
    // log f_{1/2} has curvature below 1 / (2 max(1, z)), so after a Newton
    // step of size d the error is about d^2 / (2 scale).
    if (newton && std::abs(next - z) <= 1e-7 * scale) return next;
    if (hi - lo <= 1e-12 * scale) return next;
    z = next;
  }
  return z;
}

}  // namespace gravistat
