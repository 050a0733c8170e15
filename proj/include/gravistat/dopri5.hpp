#pragma once

// Dormand-Prince 5(4) with PI step-size control and the order-4 continuous
// extension, for small fixed-size Eigen states.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gravistat {

template <typename Scalar>
struct Dopri5Options {
  Scalar abs_tol = Scalar(1e-10);
  Scalar rel_tol = Scalar(1e-10);
  long max_steps = 200000;
  Scalar max_step = std::numeric_limits<Scalar>::infinity();
};

enum class StepVerdict { Continue, Modified, Stop };
enum class Dopri5Status { Completed, Stopped, StepLimit, StepUnderflow };

template <typename Scalar, int N>
struct Dopri5Result {
  using Vector = Eigen::Matrix<Scalar, N, 1>;

  Dopri5Status status = Dopri5Status::Completed;
  Scalar t_reached{};
  Vector y_reached = Vector::Zero();
  std::vector<Vector> dense;  // one entry per requested output reached
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Integrates y' = rhs(t, y) from t0 to t1 (either direction).
///
/// `outputs` must be monotone in the direction of integration and lie in
/// [t0, t1]; the solution there is produced by the continuous extension.
/// `on_step(t, y)` runs after every accepted step and may clamp `y`
/// (return Modified) or end the integration early (return Stop).
template <typename Scalar, int N, typename Rhs, typename OnStep>
Dopri5Result<Scalar, N> integrate_dopri5(Rhs&& rhs, Scalar t0,
                                         const Eigen::Matrix<Scalar, N, 1>& y0, Scalar t1,
                                         std::span<const Scalar> outputs,
                                         const Dopri5Options<Scalar>& opts, OnStep&& on_step) {
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  using std::sqrt;
  using Vector = Eigen::Matrix<Scalar, N, 1>;

  // Butcher tableau.
  constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
  constexpr Scalar a21 = Scalar(1) / 5;
  constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                   a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                   a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                   a65 = Scalar(-5103) / 18656;
  constexpr Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113, a74 = Scalar(125) / 192,
                   a75 = Scalar(-2187) / 6784, a76 = Scalar(11) / 84;
  constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695, e4 = Scalar(71) / 1920,
                   e5 = Scalar(-17253) / 339200, e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  // Dense output.
  constexpr Scalar d1 = Scalar(-12715105075.0) / Scalar(11282082432.0),
                   d3 = Scalar(87487479700.0) / Scalar(32700410799.0),
                   d4 = Scalar(-10690763975.0) / Scalar(1880347072.0),
                   d5 = Scalar(701980252875.0) / Scalar(199316789632.0),
                   d6 = Scalar(-1453857185.0) / Scalar(822651844.0),
                   d7 = Scalar(69997945.0) / Scalar(29380423.0);

  Dopri5Result<Scalar, N> result;
  result.dense.reserve(outputs.size());

  const Scalar span = t1 - t0;
  const Scalar direction = span >= 0 ? Scalar(1) : Scalar(-1);
  const Scalar length = abs(span);

  auto eval = [&](Scalar t, const Vector& y) {
    ++result.rhs_evals;
    return Vector(rhs(t, y));
  };

  auto error_norm = [&](const Vector& err, const Vector& ya, const Vector& yb) {
    const auto scale =
        (opts.abs_tol + opts.rel_tol * ya.cwiseAbs().cwiseMax(yb.cwiseAbs()).array()).eval();
    return sqrt((err.array() / scale).square().mean());
  };

  Scalar t = t0;
  Vector y = y0;
  Vector k1 = eval(t, y);
  std::size_t next_output = 0;
  while (next_output < outputs.size() && outputs[next_output] == t0) {
    result.dense.push_back(y);
    ++next_output;
  }

  // Initial step from the first-order estimate (Hairer & Wanner's hinit, simplified).
  Scalar h;
  {
    const auto sk = (opts.abs_tol + opts.rel_tol * y.cwiseAbs().array()).eval();
    const Scalar d0 = sqrt((y.array() / sk).square().mean());
    const Scalar d1n = sqrt((k1.array() / sk).square().mean());
    Scalar h0 = (d0 < Scalar(1e-5) || d1n < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1n;
    h0 = min(h0, length);
    const Vector y1 = y + direction * h0 * k1;
    const Vector f1 = eval(t + direction * h0, y1);
    const Scalar d2 = sqrt(((f1 - k1).array() / sk).square().mean()) / h0;
    const Scalar h1 = max(d1n, d2) <= Scalar(1e-15)
                          ? max(Scalar(1e-6), h0 * Scalar(1e-3))
                          : pow(Scalar(0.01) / max(d1n, d2), Scalar(0.2));
    h = min({Scalar(100) * h0, h1, length, opts.max_step});
  }

  constexpr Scalar safety = Scalar(0.9);
  constexpr Scalar beta = Scalar(0.04);
  constexpr Scalar expo = Scalar(0.2) - beta * Scalar(0.75);
  Scalar err_old = Scalar(1e-4);
  bool last_rejected = false;

  const Scalar tiny = Scalar(16) * std::numeric_limits<Scalar>::epsilon();

  while (direction * (t1 - t) > tiny * max(Scalar(1), abs(t))) {
    if (result.accepted + result.rejected >= opts.max_steps) {
      result.status = Dopri5Status::StepLimit;
      break;
    }
    if (h < tiny * max(Scalar(1), abs(t))) {
      result.status = Dopri5Status::StepUnderflow;
      break;
    }
    bool final_step = false;
    if (h >= direction * (t1 - t)) {
      h = direction * (t1 - t);
      final_step = true;
    }
    const Scalar hs = direction * h;

    const Vector k2 = eval(t + c2 * hs, y + hs * (a21 * k1));
    const Vector k3 = eval(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Vector k4 = eval(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = eval(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = eval(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Scalar t_new = final_step ? t1 : t + hs;
    const Vector k7 = eval(t_new, y_new);

    const Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Scalar en = error_norm(err, y, y_new);

    if (!(en <= Scalar(1))) {
      ++result.rejected;
      const Scalar fac = std::isfinite(double(en))
                             ? min(Scalar(1) / Scalar(0.2), pow(en, expo) / safety)
                             : Scalar(10);
      h = h / max(fac, Scalar(1));
      last_rejected = true;
      continue;
    }

    ++result.accepted;
    // Continuous extension over [t, t_new].
    const Vector ydiff = y_new - y;
    const Vector bspl = hs * k1 - ydiff;
    const Vector r4 = ydiff - hs * k7 - bspl;
    const Vector r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    while (next_output < outputs.size() &&
           direction * (outputs[next_output] - t_new) <= Scalar(0)) {
      const Scalar theta = (outputs[next_output] - t) / hs;
      const Scalar theta1 = Scalar(1) - theta;
      result.dense.push_back(y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5))));
      ++next_output;
    }

    Scalar fac = pow(en, expo) / pow(err_old, beta) / safety;
    fac = std::clamp(fac, Scalar(0.2), Scalar(10));
    Scalar h_new = h / fac;
    if (last_rejected) h_new = min(h_new, h);
    err_old = max(en, Scalar(1e-4));
    last_rejected = false;

    t = t_new;
    y = y_new;
    k1 = k7;
    h = min(h_new, opts.max_step);

    const StepVerdict verdict = on_step(t, y);
    if (verdict == StepVerdict::Stop) {
      result.status = Dopri5Status::Stopped;
      break;
    }
    if (verdict == StepVerdict::Modified) k1 = eval(t, y);
    if (final_step) break;
  }

  result.t_reached = t;
  result.y_reached = y;
  return result;
}

}  // namespace gravistat
