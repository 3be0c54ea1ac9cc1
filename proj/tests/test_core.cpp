#include "microdrift/errors.hpp"
#include "microdrift/hamiltonian.hpp"
#include "microdrift/presets.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace microdrift;
using testing::vec;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("eval_h on quadratic and mixed polynomials") {
  const RealPolynomial h = half_square(2);
  CHECK(eval_h(h, vec({0, 1})) == doctest::Approx(0.5));
  CHECK(eval_h(h, vec({0, 0})) == 0.0);
  RealPolynomial g(2);
  g.add_term({2, 0}, 0.5);
  g.add_term({1, 1}, 1.0);
  CHECK(eval_h(g, vec({1, 2})) == doctest::Approx(2.5));
  CHECK_THROWS_AS(eval_h(g, vec({1, 2, 3})), ValidationError);
}

TEST_CASE("grad_h examples and finite-difference agreement") {
  const RealPolynomial h = half_square(2);
  CHECK((grad_h(h, vec({0, 1})) - vec({0, 1})).norm() == 0.0);
  CHECK(grad_h(h, vec({0, 0})).norm() == 0.0);

  std::mt19937_64 rng(11);
  const double s = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const RealPolynomial p = testing::random_polynomial(rng, 3);
    const Vector x = testing::uniform(rng, 3, -1, 1);
    const Vector g = grad_h(p, x);
    const Matrix hs = hess_h(p, x);
    for (Eigen::Index j = 0; j < 3; ++j) {
      Vector xp = x, xm = x;
      xp[j] += s;
      xm[j] -= s;
      CHECK(rel_err((eval_h(p, xp) - eval_h(p, xm)) / (2 * s), g[j]) < 1e-6);
      const Vector col = (grad_h(p, xp) - grad_h(p, xm)) / (2 * s);
      for (Eigen::Index i = 0; i < 3; ++i) CHECK(rel_err(col[i], hs(i, j)) < 1e-6);
    }
  }
}

TEST_CASE("hess_h examples and symmetry") {
  CHECK((hess_h(half_square(3), vec({0.3, -0.2, 0.9})) - Matrix::Identity(3, 3)).norm() == 0.0);
  RealPolynomial cube(2);
  cube.add_term({3, 0}, 1.0);
  const Matrix m = hess_h(cube, vec({1, 0.5}));
  CHECK(m(0, 0) == doctest::Approx(6.0));
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix r = hess_h(testing::random_polynomial(rng, 4), testing::uniform(rng, 4, -1, 1));
    CHECK((r - r.transpose()).norm() == 0.0);
  }
}

TEST_CASE("eval_f examples") {
  const FourierPerturbation f = cosine_mode(2, {1, 0}, 1.0);
  CHECK(eval_f(f, vec({0, 0}), vec({0.3, 0.1})) == doctest::Approx(1.0));
  CHECK(std::abs(eval_f(f, vec({0.25, 0}), vec({0, 0}))) < 1e-15);
  const FourierPerturbation g = cosine_mode(2, {1, 1}, 1.0);
  CHECK(eval_f(g, vec({0.25, 0.25}), vec({0, 0})) == doctest::Approx(-1.0));
}

TEST_CASE("grad_theta_f and grad_I_f examples") {
  const FourierPerturbation f = cosine_mode(2, {1, 0}, 1.0);
  const Vector g = grad_theta_f(f, vec({0.25, 0}), vec({0, 0}));
  CHECK(g[0] == doctest::Approx(-kTwoPi));
  CHECK(std::abs(g[1]) < 1e-15);
  CHECK(grad_I_f(f, vec({0.1, 0.7}), vec({0.4, -0.3})).norm() == 0.0);
}

TEST_CASE("Fourier derivatives match finite differences") {
  std::mt19937_64 rng(17);
  const double s = 1e-5;
  for (int trial = 0; trial < 30; ++trial) {
    const FourierPerturbation f = testing::random_fourier(rng, 3);
    const Vector th = testing::uniform(rng, 3, 0, 1);
    const Vector I = testing::uniform(rng, 3, -1, 1);
    const Vector gt = grad_theta_f(f, th, I);
    const Vector gi = grad_I_f(f, th, I);
    for (Eigen::Index j = 0; j < 3; ++j) {
      Vector tp = th, tm = th, ip = I, im = I;
      tp[j] += s;
      tm[j] -= s;
      ip[j] += s;
      im[j] -= s;
      const double scale = 1.0 + f.size() * 10.0;
      CHECK(std::abs((eval_f(f, tp, I) - eval_f(f, tm, I)) / (2 * s) - gt[j]) < 1e-6 * scale);
      CHECK(std::abs((eval_f(f, th, ip) - eval_f(f, th, im)) / (2 * s) - gi[j]) < 1e-6 * scale);
    }
  }
}

TEST_CASE("reality: imaginary residue below 1e-12 at 1000 random points") {
  std::mt19937_64 rng(3);
  const FourierPerturbation f = testing::random_fourier(rng, 2, 6);
  REQUIRE(f.is_real());
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto z = f.eval_complex(testing::uniform(rng, 2, 0, 1), testing::uniform(rng, 2, -1, 1));
    worst = std::max(worst, std::abs(z.imag()));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("reality violations are rejected") {
  FourierPerturbation f(2);
  f.add_mode({1, 0}, ComplexPolynomial::constant(2, {0.5, 0.0}));
  CHECK_THROWS_AS(f.check_reality(), ValidationError);
  CHECK_THROWS_AS(NearIntegrableSystem(half_square(2), f, 0.1, 1.0), ValidationError);
}

TEST_CASE("torus periodicity is exact") {
  std::mt19937_64 rng(8);
  const FourierPerturbation f = testing::random_fourier(rng, 3);
  for (int trial = 0; trial < 200; ++trial) {
    Vector th = testing::uniform(rng, 3, 0, 1);
    // make theta + 1 exactly representable
    for (auto& x : th) x = (x + 1.0) - 1.0;
    const Vector I = testing::uniform(rng, 3, -1, 1);
    for (Eigen::Index j = 0; j < 3; ++j) {
      Vector shifted = th;
      shifted[j] += 1.0;
      CHECK(eval_f(f, shifted, I) == eval_f(f, th, I));
    }
  }
}

TEST_CASE("system invariants") {
  const FourierPerturbation f = cosine_mode(2, {1, 0}, 1.0);
  CHECK_THROWS_AS(NearIntegrableSystem(half_square(1), FourierPerturbation(1), 0.1, 1.0), ValidationError);
  CHECK_THROWS_AS(NearIntegrableSystem(half_square(2), f, -1e-3, 1.0), ValidationError);
  CHECK_THROWS_AS(NearIntegrableSystem(half_square(2), f, 1e-3, 0.0), ValidationError);
  CHECK_THROWS_AS(NearIntegrableSystem(half_square(2), cosine_mode(3, {1, 0, 0}, 1.0), 1e-3, 1.0), ValidationError);
}

TEST_CASE("sup-norm estimates") {
  const NearIntegrableSystem unit(half_square(2), cosine_mode(2, {1, 0}, unit_amplitude()), 0.0, 1.0);
  const SupNormEstimates e = sup_norm_estimates(unit);
  CHECK(e.h_c2 == doctest::Approx(1.0));
  CHECK(e.f_c3 == doctest::Approx(1.0));
  CHECK(e.normalized());
  const NearIntegrableSystem big(half_square(2), cosine_mode(2, {1, 0}, 1.0), 0.0, 1.0);
  CHECK(sup_norm_estimates(big).f_c3 == doctest::Approx(std::pow(kTwoPi, 3)).epsilon(1e-12));
  CHECK(sup_norm_estimates(big).f_c3 == doctest::Approx(248.05).epsilon(1e-4));
  CHECK_THROWS_AS(sup_norm_estimates(big, 7), ValidationError);
}

TEST_CASE("energy and vector field of the near-integrable system") {
  const Preset p = pendulum(1e-3);
  const Vector th = vec({0.2, 0.7}), I = vec({0.1, 0.9});
  const double a = unit_amplitude();
  CHECK(p.system.energy(th, I) == doctest::Approx(0.5 * (0.01 + 0.81) + 1e-3 * a * std::cos(kTwoPi * 0.2)));
  Vector td, id;
  p.system.vector_field(th, I, td, id);
  CHECK(td[0] == doctest::Approx(0.1));
  CHECK(td[1] == doctest::Approx(0.9));
  CHECK(id[0] == doctest::Approx(1e-3 * a * kTwoPi * std::sin(kTwoPi * 0.2)));
  CHECK(id[1] == 0.0);
}
