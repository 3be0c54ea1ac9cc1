#pragma once

#include "microdrift/fourier.hpp"
#include "microdrift/hamiltonian.hpp"
#include "microdrift/types.hpp"

#include <complex>
#include <map>

namespace microdrift {

/// Real trigonometric polynomial on T^d with constant coefficients; used for
/// the resonant average frozen at the resonant point.
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  const std::map<Mode, std::complex<double>>& modes() const { return modes_; }
  void add_mode(const Mode& k, std::complex<double> c);

  /// True when no mode other than k = 0 survives.
  bool is_constant() const;

  double value(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  Matrix hessian(const Vector& theta) const;
  /// Hessian of the j-th gradient component (slice of the third derivative).
  Matrix third_slice(const Vector& theta, std::size_t j) const;

 private:
  std::size_t dim_ = 0;
  std::map<Mode, std::complex<double>> modes_;
};

struct ThetaStar {
  Vector theta;
  double lambda = 0.0;  // |grad f*(theta)|_sup; zero when f* is constant
};

struct ProofConstants {
  double delta = 0.0;
  double tau = 0.0;
  double c = 0.0;
};

/// Resonant average and everything the drift protocol derives from it.
struct AveragedPerturbation {
  int d = 0;
  FourierPerturbation f_omega;
  TrigPolynomial f_omega_star;
  Vector theta_star;
  double lambda = 0.0;
  double hessian_bound = 0.0;  // L
  double delta = 0.0;
  double c = 0.0;

  bool non_constant() const { return lambda > 0.0; }
  double tau(double epsilon) const;
};

/// Keeps the modes with k_{d+1..n} = 0 (input in adapted coordinates).
FourierPerturbation resonant_average(const FourierPerturbation& f, int d);

/// f_omega(theta_1..d, I = 0) as a function of the d resonant angles.
TrigPolynomial restrict_to_resonant_point(const FourierPerturbation& f_omega, int d);

/// (1/T) int_0^T f(theta + s w, I) ds by composite Simpson quadrature.
/// Test oracle only.
double time_average_oracle(const FourierPerturbation& f, const Vector& omega, const Vector& theta,
                           const Vector& action, double t_final);

/// Grid scan (64 per dimension, lexicographic tie-break) followed by at most
/// 50 damped Newton/gradient ascent steps on the active gradient component.
ThetaStar locate_theta_star(const TrigPolynomial& f_star);

/// sup over a 128^d grid of the max-row-sum norm of the Hessian.
double hessian_bound(const TrigPolynomial& f_star, int grid = 128);

/// delta = sqrt(lambda / (6 L)), tau = delta / sqrt(eps), c = lambda delta / 8.
ProofConstants derive_constants(double lambda, double hessian_bound, double epsilon);

/// Full averaging pipeline on an adapted, I*-centred system.
AveragedPerturbation average(const NearIntegrableSystem& adapted, int d);

}  // namespace microdrift
