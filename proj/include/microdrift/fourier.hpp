#pragma once

#include "microdrift/polynomial.hpp"
#include "microdrift/types.hpp"

#include <complex>
#include <functional>
#include <map>
#include <vector>

namespace microdrift {

/// Finite Fourier series f(theta, I) = sum_k c_k(I) exp(i 2 pi k.theta) with
/// polynomial coefficients. Angles are in full turns.
///
/// Both members of every +-k pair are stored. A real-valued series has
/// c_{-k} = conj(c_k); check_reality() verifies that structurally.
class FourierPerturbation {
 public:
  static constexpr double kRealityTolerance = 1e-12;

  FourierPerturbation() = default;
  explicit FourierPerturbation(std::size_t n) : n_(n) {}

  std::size_t dim() const { return n_; }
  bool empty() const { return modes_.empty(); }
  std::size_t size() const { return modes_.size(); }

  /// Accumulates c into the coefficient of mode k. A coefficient that
  /// becomes identically zero removes the mode.
  void add_mode(const Mode& k, const ComplexPolynomial& c);

  /// The mode table, keyed by wave vector.
  std::map<Mode, ComplexPolynomial> coefficients() const;
  const ComplexPolynomial* coefficient(const Mode& k) const;

  /// Largest sup-norm |k| over the support (K_f). Zero for an empty table.
  int max_order() const;

  /// Throws ValidationError naming the first mode whose partner violates
  /// c_{-k} = conj(c_k).
  void check_reality(double tol = kRealityTolerance) const;
  bool is_real(double tol = kRealityTolerance) const;

  std::complex<double> eval_complex(const Vector& theta, const Vector& action) const;

  /// Real value; throws NumericError if the imaginary residue exceeds the
  /// reality tolerance (signals a corrupt table).
  double eval(const Vector& theta, const Vector& action) const;

  Vector grad_theta(const Vector& theta, const Vector& action) const;
  Vector grad_action(const Vector& theta, const Vector& action) const;

  /// Both gradients in one pass over the table.
  void gradients(const Vector& theta, const Vector& action, Vector& d_theta, Vector& d_action) const;

  /// Mixed partial d^a_theta d^b_I f (real part).
  double derivative(const Vector& theta, const Vector& action, const MultiIndex& theta_order,
                    const MultiIndex& action_order) const;

  FourierPerturbation filtered(const std::function<bool(const Mode&)>& keep) const;
  FourierPerturbation scaled(double factor) const;

  friend FourierPerturbation operator+(const FourierPerturbation& a, const FourierPerturbation& b);

  bool operator==(const FourierPerturbation& other) const;

 private:
  struct Entry {
    ComplexPolynomial coeff;
    std::vector<ComplexPolynomial> grad;  // d c / d I_j
  };

  void check_args(const Vector& theta, const Vector& action) const;

  std::size_t n_ = 0;
  std::map<Mode, Entry> modes_;
};

}  // namespace microdrift
