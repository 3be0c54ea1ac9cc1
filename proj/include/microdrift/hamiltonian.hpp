#pragma once

#include "microdrift/fourier.hpp"
#include "microdrift/polynomial.hpp"
#include "microdrift/types.hpp"

#include <vector>

namespace microdrift {

/// Anything the symplectic integrator can advance: an autonomous Hamiltonian
/// on T^n x R^n with angles in full turns.
class HamiltonianFlow {
 public:
  virtual ~HamiltonianFlow() = default;
  virtual std::size_t dimension() const = 0;
  virtual double energy(const Vector& theta, const Vector& action) const = 0;
  /// theta_dot = dH/dI, action_dot = -dH/dtheta.
  virtual void vector_field(const Vector& theta, const Vector& action, Vector& theta_dot,
                            Vector& action_dot) const = 0;
};

/// H(theta, I) = h(I) + eps f(theta, I).
class NearIntegrableSystem final : public HamiltonianFlow {
 public:
  NearIntegrableSystem(RealPolynomial h, FourierPerturbation f, double epsilon, double domain_radius);

  std::size_t n() const { return h_.dim(); }
  std::size_t dimension() const override { return n(); }
  const RealPolynomial& h() const { return h_; }
  const FourierPerturbation& f() const { return f_; }
  double epsilon() const { return epsilon_; }
  double domain_radius() const { return radius_; }

  NearIntegrableSystem with_epsilon(double epsilon) const;
  NearIntegrableSystem with_perturbation(FourierPerturbation f) const;

  Vector frequency(const Vector& action) const;

  double energy(const Vector& theta, const Vector& action) const override;
  void vector_field(const Vector& theta, const Vector& action, Vector& theta_dot,
                    Vector& action_dot) const override;

 private:
  RealPolynomial h_;
  std::vector<RealPolynomial> grad_h_;
  FourierPerturbation f_;
  double epsilon_;
  double radius_;
};

double eval_h(const RealPolynomial& h, const Vector& action);
Vector grad_h(const RealPolynomial& h, const Vector& action);
Matrix hess_h(const RealPolynomial& h, const Vector& action);

double eval_f(const FourierPerturbation& f, const Vector& theta, const Vector& action);
Vector grad_theta_f(const FourierPerturbation& f, const Vector& theta, const Vector& action);
Vector grad_I_f(const FourierPerturbation& f, const Vector& theta, const Vector& action);

/// Sampled C^k norms: the maximum over a grid of |d^alpha g| for all
/// |alpha| <= k. Report only, never used to reject a system.
struct SupNormEstimates {
  double h_c2 = 0.0;
  double f_c3 = 0.0;
  int grid_per_dimension = 0;
  bool normalized() const { return h_c2 <= 1.0 && f_c3 <= 1.0; }
};

/// Grid with m points per angle (j/m) and m points per action spanning the
/// closed ball [-r, r]. m must be at least 8.
SupNormEstimates sup_norm_estimates(const NearIntegrableSystem& system, int m = 8);

/// Reduces every angle into [0, 1).
Vector reduce_angles(const Vector& theta);

}  // namespace microdrift
