#pragma once

#include "microdrift/types.hpp"

#include <vector>

namespace microdrift {

/// Divisors |k.w| below this are treated as an undeclared resonance.
inline constexpr double kHiddenResonanceFloor = 1e-14;

/// Psi(Q) = max{ |k.w|^{-1} : k in Z^m, 0 < |k| <= Q } by exhaustive search
/// over the sup-norm ball. Throws HiddenResonanceError on a zero divisor.
double psi(const Vector& omega_tilde, int q);

/// Tabulated small-divisor function of a non-resonant block w~ together with
/// the derived truncation function Delta and effective parameter mu.
///
/// Psi is extended to real Q as a step function, constant on [Q, Q+1).
/// Q_omega is fixed to 1 (adapted coordinates).
class SmallDivisorProfile {
 public:
  SmallDivisorProfile(Vector omega_tilde, int q_max, double kappa = 1.0);

  /// Smallest power-of-two table (starting at q_start) on which
  /// delta(x_max) is resolved.
  static SmallDivisorProfile covering(const Vector& omega_tilde, double kappa, double x_max, int q_start = 64);

  int q_max() const { return q_max_; }
  double kappa() const { return kappa_; }
  const Vector& omega_tilde() const { return omega_tilde_; }

  /// Q in [1, q_max].
  double psi(int q) const;
  double min_divisor(int q) const;

  /// Delta(x) = sup{ Q >= 1 : Q Psi(Q) <= x }, for x >= Psi(1).
  double delta(double x) const;

  /// mu(sqrt eps) = 1 / Delta(kappa / sqrt eps); zero at eps = 0.
  double mu(double sqrt_eps) const;

 private:
  Vector omega_tilde_;
  int q_max_;
  double kappa_;
  std::vector<double> min_div_;  // index q, entry 0 unused
};

}  // namespace microdrift
