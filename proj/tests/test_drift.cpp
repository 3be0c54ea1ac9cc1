#include "microdrift/drift.hpp"
#include "microdrift/errors.hpp"
#include "microdrift/normal_form.hpp"
#include "microdrift/presets.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace microdrift;
using testing::vec;

namespace {

AveragedPerturbation averaged_of(const Preset& p) {
  return average(adapted_system(p.system, p.resonance), p.resonance.d);
}

DriftConfig config_for(double eps) {
  DriftConfig c;
  c.epsilon = eps;
  return c;
}

void check_report_invariants(const DriftReport& r) {
  CHECK(r.total >= std::max(r.along, r.transverse) - 1e-15);
  CHECK(r.pass == (r.total >= r.threshold));
  CHECK(r.threshold == doctest::Approx(r.c * std::sqrt(r.epsilon)));
  CHECK(r.max_total >= r.total - 1e-15);
  CHECK(r.max_transverse >= r.transverse - 1e-15);
  CHECK(r.energy_error <= 1e-8);
}

}  // namespace

TEST_CASE("pendulum run at eps = 1e-4") {
  const double eps = 1e-4;
  const Preset p = pendulum(eps);
  const DriftReport r = micro_drift_run(p.system, p.resonance, averaged_of(p), config_for(eps));
  CHECK(r.tau == doctest::Approx(16.2868).epsilon(1e-5));
  CHECK(r.c == doctest::Approx(5.1569e-4).epsilon(1e-4));
  CHECK(r.total >= 5.16e-6);
  CHECK(r.pass);
  CHECK(r.transverse == 0.0);
  CHECK(r.max_transverse == 0.0);
  // the pendulum energy caps the action excursion
  CHECK(r.total <= std::sqrt(2 * eps * 2 * unit_amplitude()));
  CHECK(r.mu == doctest::Approx(std::sqrt(eps)));
  CHECK(!r.mu_exceeded);
  CHECK(r.initial_theta[0] == doctest::Approx(0.25));
  CHECK(r.drift_vector.size() == 2);
  check_report_invariants(r);
}

TEST_CASE("two-mode run: transverse drift of order eps") {
  const double eps = 1e-4;
  const Preset p = two_mode(eps);
  const DriftReport r = micro_drift_run(p.system, p.resonance, averaged_of(p), config_for(eps));
  CHECK(r.pass);
  CHECK(r.max_transverse > 0.0);
  CHECK(r.max_transverse <= 10.0 * eps);
  CHECK(r.fitted_c == doctest::Approx(r.max_transverse / (std::sqrt(eps) * r.mu)));
  check_report_invariants(r);
}

TEST_CASE("drift vector is reported in user coordinates") {
  // resonance (1, 1): the adapted frame differs from the user frame
  const double eps = 1e-4;
  const NearIntegrableSystem sys(half_square(2), cosine_mode(2, {1, -1}, unit_amplitude()), eps, 2.0);
  const ResonanceData res = resonance_from_rational(sys, vec({1, 1}), {Rational(1), Rational(1)});
  const AveragedPerturbation avg = average(adapted_system(sys, res), res.d);
  const DriftReport r = micro_drift_run(sys, res, avg, config_for(eps));
  CHECK(sup_norm(res.adapted_displacement(r.drift_vector) - r.drift_adapted) < 1e-15);
  // only the resonant combination moves: I_1 + I_2 is conserved
  CHECK(std::abs(r.drift_vector[0] + r.drift_vector[1]) < 1e-12);
  CHECK(r.pass);
}

TEST_CASE("phase sweep and series") {
  const double eps = 1e-4;
  const Preset p = two_mode(eps);
  DriftConfig c = config_for(eps);
  c.phase_sweep = 4;
  c.keep_series = true;
  const DriftReport r = micro_drift_run(p.system, p.resonance, averaged_of(p), c);
  CHECK(r.phases == 4);
  REQUIRE(!r.series.empty());
  CHECK(r.series.back().t == doctest::Approx(r.tau));
  c.transverse_phases = vec({0.1, 0.2});
  CHECK_THROWS_AS(micro_drift_run(p.system, p.resonance, averaged_of(p), c), ValidationError);
}

TEST_CASE("mu above mu0 is flagged, not fatal") {
  const Preset p = pendulum(1e-2);
  DriftConfig c = config_for(1e-2);
  c.mu0 = 0.05;
  const DriftReport r = micro_drift_run(p.system, p.resonance, averaged_of(p), c);
  CHECK(r.mu_exceeded);
  CHECK(r.pass);
}

TEST_CASE("drift protocol preconditions") {
  const Preset q = control_constant_average(1e-4);
  CHECK_THROWS_AS(micro_drift_run(q.system, q.resonance, averaged_of(q), config_for(1e-4)), AssumptionError);
  const Preset p = pendulum(1e-4);
  CHECK_THROWS_AS(micro_drift_run(p.system, p.resonance, averaged_of(p), config_for(0.0)), ValidationError);
  CHECK_THROWS_AS(negative_control_A1(p.system, p.resonance, *q.reference, config_for(1e-4)), ValidationError);
  CHECK_THROWS_AS(negative_control_A2(p.system, p.resonance, averaged_of(p), *q.reference, config_for(1e-4)),
                  ValidationError);
}

TEST_CASE("non-resonant control stays far below the threshold") {
  const double eps = 1e-4;
  const Preset p = control_nonresonant(eps);
  REQUIRE(p.reference);
  const DriftReport r = negative_control_A1(p.system, p.resonance, *p.reference, config_for(eps));
  CHECK(r.total <= 5 * eps / (kGoldenRatio - 1.0));
  CHECK(r.total <= 0.5 * r.threshold);
  CHECK(!r.pass);

  const DriftReport s = negative_control_A1(p.system.with_epsilon(1e-6), p.resonance, *p.reference, config_for(1e-6));
  CHECK(s.max_total / std::sqrt(1e-6) < r.max_total / std::sqrt(eps));

  const Preset res = pendulum(eps);
  const DriftReport paired = micro_drift_run(res.system, res.resonance, averaged_of(res), config_for(eps));
  CHECK(paired.pass);
  CHECK(paired.tau == doctest::Approx(r.tau));
}

TEST_CASE("constant-average control") {
  const double eps = 1e-4;
  const Preset p = control_constant_average(eps);
  REQUIRE(p.reference);
  const DriftReport r = negative_control_A2(p.system, p.resonance, averaged_of(p), *p.reference, config_for(eps));
  CHECK(r.total <= 0.5 * r.threshold);
  CHECK(r.max_total <= 10 * eps);

  const NearIntegrableSystem zero = p.system.with_perturbation(FourierPerturbation(2));
  const AveragedPerturbation za = average(adapted_system(zero, p.resonance), 1);
  const DriftReport z = negative_control_A2(zero, p.resonance, za, *p.reference, config_for(eps));
  CHECK(z.total == 0.0);
  CHECK(z.max_total == 0.0);
}

TEST_CASE("sweeps keep eps order and do not depend on the thread count") {
  const Preset p = two_mode(1e-4);
  const AveragedPerturbation avg = averaged_of(p);
  const std::vector<double> eps = log_spaced(1e-2, 1e-5, 5);
  const SweepResult a = epsilon_sweep(p.system, p.resonance, avg, eps, DriftConfig{}, 1);
  const SweepResult b = epsilon_sweep(p.system, p.resonance, avg, eps, DriftConfig{}, 3);
  REQUIRE(a.reports.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.reports[i].epsilon == eps[i]);
    CHECK(b.reports[i].epsilon == eps[i]);
    CHECK(a.reports[i].total == b.reports[i].total);
    CHECK(a.reports[i].max_transverse == b.reports[i].max_transverse);
  }
  CHECK(a.total_fit.slope == b.total_fit.slope);
  CHECK(a.all_pass());
  CHECK(std::abs(a.total_fit.slope - 0.5) < 0.05);
  CHECK(std::abs(a.transverse_fit.slope - 1.0) < 0.1);
  CHECK(a.c_stability < 2.0);

  CHECK_THROWS_AS(sweep({1e-3, 1e-4}, [](double e) -> DriftReport {
                    if (e < 1e-3) throw NumericError("boom");
                    return DriftReport{};
                  }, 2),
                  NumericError);
}

TEST_CASE("normal-form pull-back agrees with the direct run") {
  const double eps = 1e-4;
  const Preset p = two_mode(eps);
  const NearIntegrableSystem adapted = adapted_system(p.system, p.resonance);
  const AveragedPerturbation avg = average(adapted, p.resonance.d);
  const DriftReport direct = micro_drift_run(p.system, p.resonance, avg, config_for(eps));

  const SmallDivisorProfile profile(p.resonance.omega_tilde, 64);
  const GeneratorField g = build_generator(adapted, p.resonance, adapted.f().max_order(), profile);
  const NormalFormTransform phi(g, eps);
  // truncated normal form h + eps f_omega, started from Phi^{-1}(x0)
  const NearIntegrableSystem truncated = adapted.with_perturbation(avg.f_omega);
  Vector theta0(2);
  theta0 << avg.theta_star, 0.0;
  const PhaseState x0 = PhaseState::at(theta0, Vector::Zero(2));
  const PhaseState y0 = phi.inverse(x0);
  const Trajectory ty = integrate(truncated, y0, direct.tau, default_step(eps, avg.lambda), 0.0);
  const PhaseState pulled = phi.map(ty.back());
  const double gap = sup_norm(pulled.action - direct.drift_adapted);
  CHECK(gap <= 3 * direct.fitted_c * std::sqrt(eps) * direct.mu);
}
