#pragma once

#include <optional>

namespace gravistat {

/// Order of a complete Fermi-Dirac integral. Only the three half-integer
/// orders used by the gas models are representable.
class FermiOrder {
 public:
  enum class Value { MinusHalf, Half, ThreeHalves };

  constexpr FermiOrder(Value v) : value_(v) {}  // NOLINT(implicit)

  /// Throws DomainError for anything other than -1/2, 1/2, 3/2.
  static FermiOrder from_alpha(double alpha);

  constexpr double alpha() const {
    switch (value_) {
      case Value::MinusHalf: return -0.5;
      case Value::Half: return 0.5;
      case Value::ThreeHalves: return 1.5;
    }
    return 0.0;
  }
  constexpr Value value() const { return value_; }
  constexpr bool operator==(const FermiOrder&) const = default;

  static constexpr Value minus_half = Value::MinusHalf;
  static constexpr Value half = Value::Half;
  static constexpr Value three_halves = Value::ThreeHalves;

 private:
  Value value_;
};

struct FermiEvalConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 1000;

  void validate() const;
};

/// f_alpha(z) = int_0^inf x^alpha / (1 + exp(x - z)) dx.
///
/// For z < -25 the alternating Boltzmann series is summed; otherwise the
/// integral is taken in the variable u = sqrt(x) (which removes the
/// x^{-1/2} singularity), split at u = sqrt(max(z, 0)), with the tail cut
/// where the bound x^alpha e^{z-x} drops below a tenth of the tolerance.
double fermi_eval(FermiOrder order, double z, const FermiEvalConfig& cfg = {});

/// d/dz f_alpha(z) = alpha f_{alpha-1}(z). Order -1/2 is rejected.
double fermi_derivative(FermiOrder order, double z, const FermiEvalConfig& cfg = {});

/// Solves f_{1/2}(z) = v for z (v > 0). `seed`, when given, starts the
/// Newton iteration (used for warm starts along a trajectory).
double fermi_inverse_half(double v, const FermiEvalConfig& cfg = {},
                          std::optional<double> seed = std::nullopt);

/// int_0^inf sqrt(x) / (1 + exp(x - z))^2 dx, which equals
/// f_{1/2}(z) - f_{-1/2}(z) / 2 without the cancellation of the difference.
double fermi_half_excess(double z, const FermiEvalConfig& cfg = {});

}  // namespace gravistat
