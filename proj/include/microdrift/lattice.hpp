#pragma once

#include "microdrift/hamiltonian.hpp"
#include "microdrift/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace microdrift {

/// Exact rational number, always stored with a positive denominator in
/// lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  /// Accepts "p", "p/q" and finite decimals such as "-1.25".
  static Rational parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Basis (as rows) of the saturated lattice {k in Z^n : k.omega = 0}, in row
/// Hermite normal form. Throws ValidationError when omega = 0 and
/// AssumptionError when the kernel is trivial.
IntMatrix resonant_module(const std::vector<Rational>& omega);

/// Unimodular A whose first d rows are exactly `basis`. Throws
/// ValidationError when the basis does not generate a saturated lattice.
IntMatrix unimodular_adaptation(const IntMatrix& basis);

/// Row Hermite normal form (same row lattice).
IntMatrix hermite_normal_form(const IntMatrix& m);

std::int64_t determinant(const IntMatrix& a);

/// Exact inverse of a unimodular matrix; throws ValidationError otherwise.
IntMatrix integer_inverse(const IntMatrix& a);

Matrix to_real(const IntMatrix& a);

/// Resonant point, its frequency and the adapted frame in which the resonant
/// module is spanned by the first d basis vectors.
struct ResonanceData {
  Vector i_star;
  Vector omega;
  int d = 0;
  IntMatrix lambda_basis;  // d x n
  IntMatrix adaptation;    // A, n x n, |det A| = 1
  IntMatrix adaptation_inverse;
  Vector omega_tilde;      // last n - d components of A omega

  std::size_t n() const { return static_cast<std::size_t>(i_star.size()); }

  /// Checks every structural invariant. d = 0 (no resonance) is accepted only
  /// when allow_nonresonant is set, for negative-control experiments.
  void validate(bool allow_nonresonant = false) const;

  Vector to_adapted_angles(const Vector& theta) const;
  Vector from_adapted_angles(const Vector& theta_adapted) const;
  Vector to_adapted_actions(const Vector& action) const;
  Vector from_adapted_actions(const Vector& action_adapted) const;
  /// A^{-T} v, for action differences (no shift).
  Vector adapted_displacement(const Vector& delta) const;
};

/// omega given exactly; checks that grad h(I*) equals it.
ResonanceData resonance_from_rational(const NearIntegrableSystem& system, const Vector& i_star,
                                      const std::vector<Rational>& omega);

/// omega = (0, omega_tilde) already in adapted form; A is the identity.
ResonanceData resonance_from_adapted(const NearIntegrableSystem& system, const Vector& i_star, int d,
                                     const Vector& omega_tilde, bool allow_nonresonant = false);

/// I = shift + J: the returned system is expressed in J.
NearIntegrableSystem shift_actions(const NearIntegrableSystem& system, const Vector& shift);

/// theta' = A theta, I' = A^{-T} I, k' = A^{-T} k, h'(I') = h(A^T I').
NearIntegrableSystem transform_system(const NearIntegrableSystem& system, const IntMatrix& a);

/// Shift I* to the origin, then apply the adaptation.
NearIntegrableSystem adapted_system(const NearIntegrableSystem& system, const ResonanceData& resonance);

}  // namespace microdrift
