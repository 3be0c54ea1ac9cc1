#include "microdrift/errors.hpp"
#include "microdrift/lattice.hpp"
#include "microdrift/normal_form.hpp"
#include "microdrift/presets.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace microdrift;
using testing::state_equal;
using testing::vec;

namespace {

struct Setup {
  NearIntegrableSystem adapted;
  ResonanceData resonance;
  FourierPerturbation f_omega;
  SmallDivisorProfile profile;
  GeneratorField generator;
};

Setup prepare(const Preset& p) {
  NearIntegrableSystem adapted = adapted_system(p.system, p.resonance);
  FourierPerturbation f_omega = resonant_average(adapted.f(), p.resonance.d);
  SmallDivisorProfile profile(p.resonance.omega_tilde, 64);
  GeneratorField g = build_generator(adapted, p.resonance, std::max(1, adapted.f().max_order()), profile);
  return {std::move(adapted), p.resonance, std::move(f_omega), std::move(profile), std::move(g)};
}

PhaseState random_state(std::mt19937_64& rng, std::size_t n, double radius) {
  return PhaseState::at(testing::uniform(rng, n, 0, 1), testing::uniform(rng, n, -radius, radius));
}

// random adapted system with omega = (0, 1, golden) and d = 1
Preset random_adapted(std::mt19937_64& rng, double eps) {
  const Vector i_star = vec({0, 1, kGoldenRatio});
  const NearIntegrableSystem sys(half_square(3), testing::random_fourier(rng, 3, 5), eps, 3.0);
  ResonanceData r = resonance_from_adapted(sys, i_star, 1, vec({1, kGoldenRatio}));
  return Preset{"random", sys, r, std::nullopt};
}

}  // namespace

TEST_CASE("generator of a single non-resonant cosine") {
  const Setup s = prepare(periodic_single_mode(1e-4));
  CHECK(s.generator.chi.size() == 2);
  CHECK(s.generator.divisor_floor == doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector th = testing::uniform(rng, 2, 0, 1);
    const Vector I = testing::uniform(rng, 2, -0.02, 0.02);
    CHECK(s.generator.chi.eval(th, I) == doctest::Approx(std::sin(kTwoPi * (th[0] + th[1])) / kTwoPi).epsilon(1e-13));
  }
}

TEST_CASE("resonant-only perturbations give chi = 0 and an exact conjugacy") {
  const Setup s = prepare(pendulum(1e-4));
  CHECK(s.generator.chi.empty());
  const NormalFormTransform phi(s.generator, 1e-4);
  const PhaseState x = PhaseState::at(vec({0.3, 0.6}), vec({0.01, -0.005}));
  CHECK(state_equal(phi.apply(x), x));
  SamplingOptions opt;
  opt.samples = 100;
  const RemainderReport r = remainder_report(s.adapted, s.f_omega, s.generator, 1e-4, 1e-2, opt);
  CHECK(r.sup_displacement == 0.0);
  CHECK(r.sup_dtheta == 0.0);
  CHECK(r.sup_dI == 0.0);
  CHECK(r.sample_count == 100);
}

TEST_CASE("generator is real and solves the homological equation at the resonant point") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Preset p = random_adapted(rng, 1e-4);
    const Setup s = prepare(p);
    for (const auto& [k, c] : s.generator.chi.coefficients()) CHECK((k[1] != 0 || k[2] != 0));
    CHECK(s.generator.divisor_floor * s.profile.psi(s.generator.q) >= 1.0 - 1e-9);
    const Vector zero = Vector::Zero(3);
    for (int i = 0; i < 10; ++i) {
      const Vector th = testing::uniform(rng, 3, 0, 1);
      CHECK(std::abs(s.generator.chi.eval_complex(th, testing::uniform(rng, 3, -0.1, 0.1)).imag()) < 1e-12);
      const Vector w = s.adapted.frequency(zero);
      const double lhs = s.adapted.f().eval(th, zero) - s.f_omega.eval(th, zero) -
                         w.dot(s.generator.chi.grad_theta(th, zero));
      CHECK(std::abs(lhs) < 1e-10);
    }
  }
}

TEST_CASE("generator preconditions") {
  const Preset p = periodic_single_mode(1e-4);
  const NearIntegrableSystem adapted = adapted_system(p.system, p.resonance);
  const SmallDivisorProfile profile(p.resonance.omega_tilde, 8);
  FourierPerturbation f2 = cosine_mode(2, {2, 1}, 0.1);
  CHECK_THROWS_AS(build_generator(adapted.with_perturbation(f2), p.resonance, 1, profile), ValidationError);
  CHECK_NOTHROW(build_generator(adapted.with_perturbation(f2), p.resonance, 2, profile));
  // a profile for different frequencies is caught
  const SmallDivisorProfile wrong(vec({5.0}), 8);
  CHECK_THROWS_AS(build_generator(adapted, p.resonance, 1, wrong), NumericError);
}

TEST_CASE("transform: identity at eps = 0, round trip and domain checks") {
  const Setup s = prepare(periodic_single_mode(1e-4));
  const PhaseState x = PhaseState::at(vec({0.2, 0.9}), vec({0.001, -0.015}));
  CHECK(state_equal(NormalFormTransform(s.generator, 0.0).map(x), x));

  std::mt19937_64 rng(2);
  const double eps = 1e-4;
  for (int i = 0; i < 20; ++i) {
    const PhaseState a = random_state(rng, 2, 2 * std::sqrt(eps));
    const PhaseState b = inverse_transform(s.generator, eps, apply_transform(s.generator, eps, a));
    CHECK(sup_norm(b.unwrapped_theta() - a.unwrapped_theta()) < 1e-9);
    CHECK(sup_norm(b.action - a.action) < 1e-9);
  }
  CHECK_THROWS_AS(apply_transform(s.generator, eps, PhaseState::at(vec({0, 0}), vec({0.05, 0}))), ValidationError);
  CHECK_THROWS_AS(NormalFormTransform(s.generator, eps, 0.0), ValidationError);
}

TEST_CASE("transform displacement is of order eps in the periodic case") {
  const Setup s = prepare(periodic_single_mode(1e-4));
  const double eps = 1e-4;
  SamplingOptions opt;
  opt.samples = 1000;
  opt.threads = 2;
  const RemainderReport r = remainder_report(s.adapted, s.f_omega, s.generator, eps, std::sqrt(eps), opt);
  CHECK(r.sup_displacement >= 0.5 * eps);
  CHECK(r.sup_displacement <= 2.0 * eps);
}

TEST_CASE("generator flow conserves chi and phase-space volume") {
  const Setup s = prepare(periodic_single_mode(1e-4));
  const double eps = 1e-4;
  const NormalFormTransform phi(s.generator, eps);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const PhaseState x = random_state(rng, 2, 2 * std::sqrt(eps));
    const PhaseState y = phi.map(x);
    CHECK(std::abs(s.generator.chi.eval(y.theta, y.action) - s.generator.chi.eval(x.theta, x.action)) < 1e-9);

    // volume of a small 4-simplex before and after the map
    const double h = 1e-5;
    Eigen::Vector4d base;
    base << y.unwrapped_theta(), y.action;
    Eigen::Matrix4d after;
    for (int j = 0; j < 4; ++j) {
      Vector th = x.unwrapped_theta(), ac = x.action;
      if (j < 2) th[j] += h;
      else ac[j - 2] += h;
      const PhaseState img = phi.map(PhaseState::at(th, ac));
      Eigen::Vector4d q;
      q << img.unwrapped_theta(), img.action;
      after.col(j) = (q - base) / h;
    }
    CHECK(std::abs(after.determinant() - 1.0) < 1e-6);
  }
}

TEST_CASE("remainder vanishes at eps = 0") {
  const Setup s = prepare(periodic_single_mode(1e-4));
  SamplingOptions opt;
  opt.samples = 50;
  const RemainderReport r = remainder_report(s.adapted.with_epsilon(0.0), s.f_omega, s.generator, 0.0, 0.0, opt);
  CHECK(r.sup_displacement == 0.0);
  CHECK(r.sup_dtheta == 0.0);
  CHECK(r.sup_dI == 0.0);
}

TEST_CASE("remainder sampling is deterministic and thread independent") {
  const Setup s = prepare(two_mode(1e-4));
  SamplingOptions one, four;
  one.samples = four.samples = 60;
  four.threads = 4;
  const RemainderReport a = remainder_report(s.adapted, s.f_omega, s.generator, 1e-4, 1e-2, one);
  const RemainderReport b = remainder_report(s.adapted, s.f_omega, s.generator, 1e-4, 1e-2, four);
  CHECK(a.sup_displacement == b.sup_displacement);
  CHECK(a.sup_dtheta == b.sup_dtheta);
  CHECK(a.sup_dI == b.sup_dI);
}

TEST_CASE("periodic example: remainder exponents") {
  const Preset p = periodic_single_mode(1e-4);
  EstimateOptions opt;
  opt.sampling.samples = 100;
  const EstimateVerification v = verify_estimates(p.system, p.resonance, {1e-3, 1e-4, 1e-5, 1e-6}, opt);
  REQUIRE(v.rows.size() == 4);
  CHECK(std::abs(v.displacement.fit.slope - 1.0) <= 0.1);
  CHECK(v.dtheta.fit.slope >= 1.4);
  CHECK(v.dI.fit.slope >= 0.9);
  for (const auto* e : {&v.displacement, &v.dtheta, &v.dI}) {
    CHECK(std::isfinite(e->constant));
    CHECK(e->constant > 0.0);
    CHECK(e->stability < 2.0);
  }
  for (const auto& row : v.rows) {
    CHECK(row.report.mu == doctest::Approx(std::sqrt(row.report.epsilon)));
    CHECK(row.ratio_displacement <= v.displacement.constant);
  }
}

TEST_CASE("golden example: displacement estimate holds with a finite constant") {
  const Preset p = golden(1e-4);
  EstimateOptions opt;
  opt.sampling.samples = 40;
  const EstimateVerification v = verify_estimates(p.system, p.resonance, {1e-3, 1e-4, 1e-5, 1e-6}, opt);
  // the bound scales like eps^(3/4); a finite Fourier series moves points by O(eps)
  CHECK(v.displacement.fit.slope >= 0.65);
  CHECK(std::isfinite(v.displacement.constant));
  for (const auto& row : v.rows) CHECK(row.report.sup_displacement <= v.displacement.constant * row.bound_displacement);
  CHECK(v.rows.back().report.mu < v.rows.front().report.mu);
}
