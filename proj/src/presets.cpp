#include "microdrift/presets.hpp"

#include "microdrift/errors.hpp"

#include <cmath>

namespace microdrift {

FourierPerturbation cosine_mode(std::size_t n, const Mode& k, double amplitude) {
  if (k.size() != n) throw ValidationError("mode length differs from n");
  FourierPerturbation f(n);
  Mode minus = k;
  for (int& v : minus) v = -v;
  const auto half = ComplexPolynomial::constant(n, {0.5 * amplitude, 0.0});
  f.add_mode(k, half);
  f.add_mode(minus, half);
  return f;
}

RealPolynomial half_square(std::size_t n) {
  RealPolynomial h(n);
  for (std::size_t i = 0; i < n; ++i) {
    MultiIndex alpha(n, 0);
    alpha[i] = 2;
    h.add_term(alpha, 0.5);
  }
  return h;
}

double unit_amplitude() { return 1.0 / (kTwoPi * kTwoPi * kTwoPi); }

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ControlReference pendulum_reference() {
  ControlReference ref;
  ref.lambda = 1.0 / (kTwoPi * kTwoPi);
  ref.hessian_bound = 1.0 / kTwoPi;
  ref.theta0 = vec({0.25, 0.0});
  return ref;
}

Preset rational_preset(std::string name, FourierPerturbation f, double epsilon) {
  NearIntegrableSystem sys(half_square(2), std::move(f), epsilon, 2.0);
  ResonanceData res = resonance_from_rational(sys, vec({0.0, 1.0}), {Rational(0), Rational(1)});
  return Preset{std::move(name), std::move(sys), std::move(res), std::nullopt};
}

}  // namespace

Preset pendulum(double epsilon) {
  return rational_preset("pendulum", cosine_mode(2, {1, 0}, unit_amplitude()), epsilon);
}

Preset two_mode(double epsilon) {
  const double a = unit_amplitude();
  return rational_preset("two_mode", cosine_mode(2, {1, 0}, a) + cosine_mode(2, {1, 1}, a), epsilon);
}

Preset control_nonresonant(double epsilon) {
  NearIntegrableSystem sys(half_square(2), cosine_mode(2, {1, 1}, unit_amplitude()), epsilon, 2.0);
  const Vector w = vec({1.0, kGoldenRatio});
  ResonanceData res = resonance_from_adapted(sys, w, 0, w, true);
  return Preset{"control_nonresonant", std::move(sys), std::move(res), pendulum_reference()};
}

Preset control_constant_average(double epsilon) {
  Preset p = rational_preset("control_constant_average", cosine_mode(2, {1, 1}, unit_amplitude()), epsilon);
  p.reference = pendulum_reference();
  return p;
}

Preset periodic_single_mode(double epsilon) {
  return rational_preset("periodic_single_mode", cosine_mode(2, {1, 1}, 1.0), epsilon);
}

Preset golden(double epsilon) {
  const double a = unit_amplitude();
  NearIntegrableSystem sys(half_square(3), cosine_mode(3, {1, 0, 0}, a) + cosine_mode(3, {1, 1, -1}, a), epsilon,
                           2.0);
  ResonanceData res = resonance_from_adapted(sys, vec({0.0, 1.0, kGoldenRatio}), 1, vec({1.0, kGoldenRatio}));
  return Preset{"golden", std::move(sys), std::move(res), std::nullopt};
}

std::vector<std::string> preset_names() {
  return {"pendulum", "two_mode", "control_nonresonant", "control_constant_average", "periodic_single_mode",
          "golden"};
}

Preset preset_by_name(const std::string& name, double epsilon) {
  if (name == "pendulum") return pendulum(epsilon);
  if (name == "two_mode") return two_mode(epsilon);
  if (name == "control_nonresonant") return control_nonresonant(epsilon);
  if (name == "control_constant_average") return control_constant_average(epsilon);
  if (name == "periodic_single_mode") return periodic_single_mode(epsilon);
  if (name == "golden") return golden(epsilon);
  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace microdrift
