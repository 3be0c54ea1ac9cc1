#include "microdrift/averaging.hpp"
#include "microdrift/errors.hpp"
#include "microdrift/lattice.hpp"
#include "microdrift/presets.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace microdrift;
using testing::vec;

namespace {

TrigPolynomial trig(std::size_t d, std::initializer_list<std::pair<Mode, double>> cosines) {
  TrigPolynomial t(d);
  for (const auto& [k, a] : cosines) {
    Mode minus(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) minus[i] = -k[i];
    t.add_mode(k, a / 2);
    t.add_mode(minus, a / 2);
  }
  return t;
}

}  // namespace

TEST_CASE("resonant average filters modes") {
  const FourierPerturbation f = cosine_mode(2, {1, 0}, 1.0) + cosine_mode(2, {1, 1}, 1.0);
  CHECK(resonant_average(f, 1) == cosine_mode(2, {1, 0}, 1.0));
  CHECK(resonant_average(cosine_mode(2, {1, 1}, 1.0), 1).empty());
  CHECK(resonant_average(f, 2) == f);
  CHECK(resonant_average(f, 0).empty());
  CHECK_THROWS_AS(resonant_average(f, 3), ValidationError);
}

TEST_CASE("resonant average is an idempotent linear projection") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const FourierPerturbation f = testing::random_fourier(rng, 3, 6);
    const FourierPerturbation g = testing::random_fourier(rng, 3, 6);
    for (int d = 0; d <= 3; ++d) {
      const FourierPerturbation a = resonant_average(f, d);
      CHECK(resonant_average(a, d) == a);
      CHECK(resonant_average(f.scaled(2.0) + g.scaled(-0.5), d) ==
            resonant_average(f, d).scaled(2.0) + resonant_average(g, d).scaled(-0.5));
      for (const auto& [k, c] : a.coefficients())
        for (std::size_t i = static_cast<std::size_t>(d); i < k.size(); ++i) CHECK(k[i] == 0);
    }
  }
}

TEST_CASE("resonant average matches 64-node trapezoid quadrature") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierPerturbation f = testing::random_fourier(rng, 3, 6);
    for (int d = 1; d <= 2; ++d) {
      const FourierPerturbation a = resonant_average(f, d);
      for (int p = 0; p < 5; ++p) {
        const Vector th = testing::uniform(rng, 3, 0, 1);
        const Vector I = testing::uniform(rng, 3, -1, 1);
        CHECK(std::abs(a.eval(th, I) - testing::transverse_quadrature(f, d, th, I, 64)) < 1e-12);
      }
    }
  }
}

TEST_CASE("time-average oracle examples") {
  FourierPerturbation c(2);
  c.add_mode({0, 0}, ComplexPolynomial::constant(2, {0.7, 0.0}));
  CHECK(time_average_oracle(c, vec({0, 1}), vec({0.3, 0.2}), vec({0, 0}), 3.7) == doctest::Approx(0.7));
  const FourierPerturbation f = cosine_mode(2, {1, 1}, 1.0);
  CHECK(std::abs(time_average_oracle(f, vec({0, 1}), vec({0.1, 0.4}), vec({0, 0}), 1000.0)) <=
        2.0 / (kTwoPi * 1000.0));
  const FourierPerturbation g = cosine_mode(2, {1, 0}, 1.0);
  CHECK(time_average_oracle(g, vec({0, 1}), vec({0.1, 0.4}), vec({0, 0}), 5.0) ==
        doctest::Approx(std::cos(kTwoPi * 0.1)).epsilon(1e-13));
  CHECK_THROWS_AS(time_average_oracle(g, vec({0, 1}), vec({0, 0}), vec({0, 0}), 0.0), ValidationError);
}

TEST_CASE("resonant average matches the time-average oracle at T = 1e4") {
  std::mt19937_64 rng(31);
  const FourierPerturbation f = testing::random_fourier(rng, 3, 3);
  const Vector omega = vec({0, 1, kGoldenRatio});
  const FourierPerturbation a = resonant_average(f, 1);
  for (int p = 0; p < 10; ++p) {
    const Vector th = testing::uniform(rng, 3, 0, 1);
    const Vector I = testing::uniform(rng, 3, -1, 1);
    CHECK(std::abs(a.eval(th, I) - time_average_oracle(f, omega, th, I, 1e4)) < 1e-3);
  }
}

TEST_CASE("theta star examples") {
  const ThetaStar s = locate_theta_star(trig(1, {{{1}, 1.0}}));
  CHECK(s.lambda == doctest::Approx(kTwoPi).epsilon(1e-12));
  const double t = s.theta[0];
  CHECK((std::abs(t - 0.25) < 1e-9 || std::abs(t - 0.75) < 1e-9));

  const ThetaStar u = locate_theta_star(trig(1, {{{1}, unit_amplitude()}}));
  CHECK(u.lambda == doctest::Approx(std::pow(kTwoPi, -2)).epsilon(1e-12));
  CHECK(u.lambda == doctest::Approx(0.025330).epsilon(1e-4));

  const ThetaStar z = locate_theta_star(TrigPolynomial(1));
  CHECK(z.lambda == 0.0);
  CHECK_THROWS_AS(derive_constants(z.lambda, 1.0, 1e-4), AssumptionError);
}

TEST_CASE("theta star on a two-dimensional average beats a 256^2 grid") {
  const TrigPolynomial f = trig(2, {{{1, 0}, 1.0}, {{0, 1}, 0.5}});
  const ThetaStar s = locate_theta_star(f);
  const double grid = testing::grid_max_gradient(f, 256);
  CHECK(s.lambda >= grid);
  CHECK(s.lambda - grid <= 1e-8);

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const TrigPolynomial g = trig(2, {{{1, 0}, amp(rng)}, {{1, 1}, amp(rng)}, {{0, 2}, amp(rng)}});
    const ThetaStar r = locate_theta_star(g);
    CHECK(r.lambda >= testing::grid_max_gradient(g, 256) - 1e-12);
    CHECK(r.lambda == doctest::Approx(sup_norm(g.gradient(r.theta))));
  }
}

TEST_CASE("derive_constants examples") {
  const ProofConstants a = derive_constants(6.0, 1.0, 1.0);
  CHECK(a.delta == doctest::Approx(1.0));
  CHECK(a.c == doctest::Approx(0.75));
  const double lambda = std::pow(kTwoPi, -2), L = 1.0 / kTwoPi;
  const ProofConstants p = derive_constants(lambda, L, 1e-4);
  CHECK(p.delta == doctest::Approx(std::sqrt(1.0 / (12.0 * std::numbers::pi))).epsilon(1e-14));
  CHECK(p.delta == doctest::Approx(0.16287).epsilon(1e-4));
  CHECK(p.tau == doctest::Approx(p.delta / 1e-2));
  CHECK(p.c == doctest::Approx(lambda * p.delta / 8));
  CHECK(derive_constants(0.5, 1.0, 1.0).delta == doctest::Approx(std::sqrt(0.5 / 6.0)));
  CHECK_THROWS_AS(derive_constants(1.0, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(derive_constants(1.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("Hessian bound of a single cosine") {
  const TrigPolynomial f = trig(1, {{{1}, unit_amplitude()}});
  CHECK(hessian_bound(f) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));
  const TrigPolynomial g = trig(2, {{{1, 1}, 1.0}});
  // row sums of (2 pi)^2 cos [[1,1],[1,1]]
  CHECK(hessian_bound(g) == doctest::Approx(2 * kTwoPi * kTwoPi).epsilon(1e-12));
}

TEST_CASE("averaging pipeline on the shipped pendulum") {
  const Preset p = pendulum(1e-4);
  const AveragedPerturbation a = average(adapted_system(p.system, p.resonance), p.resonance.d);
  CHECK(a.lambda == doctest::Approx(std::pow(kTwoPi, -2)).epsilon(1e-12));
  CHECK(a.hessian_bound == doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));
  CHECK(a.delta == doctest::Approx(0.162868).epsilon(1e-5));
  CHECK(a.c == doctest::Approx(5.1569e-4).epsilon(1e-4));
  CHECK(a.tau(1e-4) == doctest::Approx(16.2868).epsilon(1e-5));
  CHECK(a.non_constant());

  const Preset q = control_constant_average(1e-4);
  const AveragedPerturbation b = average(adapted_system(q.system, q.resonance), q.resonance.d);
  CHECK(!b.non_constant());
  CHECK(b.f_omega.empty());
}

TEST_CASE("gradient persists on the 3 delta^2 ball around theta star") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<TrigPolynomial> cases{trig(1, {{{1}, unit_amplitude()}}),
                                    trig(1, {{{1}, 1.0}, {{2}, 0.4}, {{3}, -0.2}}),
                                    trig(2, {{{1, 0}, 1.0}, {{0, 1}, 0.5}})};
  for (int trial = 0; trial < 4; ++trial)
    cases.push_back(trig(2, {{{1, 0}, amp(rng)}, {{1, -1}, amp(rng)}, {{0, 1}, amp(rng)}}));
  for (const auto& f : cases) {
    const ThetaStar s = locate_theta_star(f);
    const double L = hessian_bound(f);
    const double delta = derive_constants(s.lambda, L, 1.0).delta;
    const double r = 3 * delta * delta;
    const auto d = static_cast<std::size_t>(f.dim());
    for (int i = 0; i < 2000; ++i) {
      const Vector th = s.theta + testing::uniform(rng, d, -r, r);
      CHECK(sup_norm(f.gradient(th)) >= s.lambda / 2);
    }
  }
}
