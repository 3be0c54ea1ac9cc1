#include "microdrift/errors.hpp"
#include "microdrift/lattice.hpp"
#include "microdrift/presets.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace microdrift;
using testing::vec;

namespace {

std::vector<Rational> rationals(std::initializer_list<std::int64_t> v) {
  std::vector<Rational> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

IntMatrix rows(std::initializer_list<std::initializer_list<std::int64_t>> r) {
  IntMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (auto x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

/// Solves basis^T c = k over the rationals by brute force over small integer
/// coefficients; the basis is in echelon form so the solution is unique.
bool in_row_lattice(const IntMatrix& basis, const std::vector<std::int64_t>& k, int bound) {
  const Eigen::Index d = basis.rows();
  std::vector<int> c(static_cast<std::size_t>(d), -bound);
  while (true) {
    bool match = true;
    for (Eigen::Index j = 0; j < basis.cols() && match; ++j) {
      std::int64_t s = 0;
      for (Eigen::Index i = 0; i < d; ++i) s += c[static_cast<std::size_t>(i)] * basis(i, j);
      match = s == k[static_cast<std::size_t>(j)];
    }
    if (match) return true;
    std::size_t p = 0;
    while (p < c.size() && ++c[p] > bound) c[p++] = -bound;
    if (p == c.size()) return false;
  }
}

}  // namespace

TEST_CASE("rational parsing") {
  CHECK(Rational::parse("3") == Rational(3));
  CHECK(Rational::parse("-6/4") == Rational(-3, 2));
  CHECK(Rational::parse("1.25") == Rational(5, 4));
  CHECK_THROWS_AS(Rational::parse("1/0"), ValidationError);
  CHECK_THROWS_AS(Rational::parse("abc"), ValidationError);
}

TEST_CASE("resonant module examples") {
  IntMatrix b = resonant_module(rationals({0, 1}));
  CHECK(b.rows() == 1);
  CHECK(b == rows({{1, 0}}));
  b = resonant_module(rationals({1, 1}));
  CHECK(b.rows() == 1);
  CHECK(b == rows({{1, -1}}));
  CHECK_THROWS_AS(resonant_module(rationals({0, 0})), ValidationError);
}

TEST_CASE("resonant module of (1,2,3) generates every small kernel vector") {
  const IntMatrix b = resonant_module(rationals({1, 2, 3}));
  REQUIRE(b.rows() == 2);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(b(i, 0) + 2 * b(i, 1) + 3 * b(i, 2) == 0);
  int checked = 0;
  for (int k1 = -10; k1 <= 10; ++k1)
    for (int k2 = -10; k2 <= 10; ++k2)
      for (int k3 = -10; k3 <= 10; ++k3) {
        if (k1 + 2 * k2 + 3 * k3 != 0) continue;
        ++checked;
        CHECK(in_row_lattice(b, {k1, k2, k3}, 40));
      }
  CHECK(checked > 100);
}

TEST_CASE("kernel vectors are exact for rational frequencies") {
  const std::vector<Rational> w{Rational(1, 2), Rational(-3, 4), Rational(5, 6), Rational(0)};
  const IntMatrix b = resonant_module(w);
  CHECK(b.rows() == 3);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    // common denominator 12
    std::int64_t s = 0;
    for (Eigen::Index j = 0; j < 4; ++j) s += b(i, j) * (w[static_cast<std::size_t>(j)].num * 12 / w[static_cast<std::size_t>(j)].den);
    CHECK(s == 0);
  }
  // one frequency is not a system
  CHECK_THROWS_AS(resonant_module({Rational(3, 2)}), ValidationError);
}

TEST_CASE("unimodular adaptation examples") {
  CHECK(unimodular_adaptation(rows({{1, 0}})) == IntMatrix::Identity(2, 2));
  const IntMatrix a = unimodular_adaptation(rows({{1, -1}}));
  CHECK(a == rows({{1, -1}, {0, 1}}));
  CHECK(determinant(a) == 1);

  const IntMatrix b = resonant_module(rationals({1, 2, 3}));
  const IntMatrix a3 = unimodular_adaptation(b);
  CHECK(std::abs(determinant(a3)) == 1);
  const Eigen::Matrix<std::int64_t, 3, 1> w(1, 2, 3);
  const auto aw = (a3 * w).eval();
  CHECK(aw[0] == 0);
  CHECK(aw[1] == 0);
  CHECK(aw[2] != 0);
  CHECK(a3.topRows(2) == b);
  const IntMatrix inv = integer_inverse(a3);
  CHECK(a3 * inv == IntMatrix::Identity(3, 3));
}

TEST_CASE("non-saturated bases are rejected") {
  CHECK_THROWS_AS(unimodular_adaptation(rows({{2, 0}})), ValidationError);
  CHECK_THROWS_AS(unimodular_adaptation(rows({{2, 4, 6}})), ValidationError);
}

TEST_CASE("hermite normal form keeps the row lattice") {
  const IntMatrix m = rows({{4, 6, 2}, {2, 3, 5}});
  const IntMatrix h = hermite_normal_form(m);
  CHECK(h(1, 0) == 0);
  CHECK(h(0, 0) > 0);
  // each original row lies in the HNF lattice and conversely
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(in_row_lattice(h, {m(i, 0), m(i, 1), m(i, 2)}, 20));
    CHECK(in_row_lattice(m, {h(i, 0), h(i, 1), h(i, 2)}, 20));
  }
}

TEST_CASE("transform_system: identity, energy invariance, frequency covariance, round trip") {
  std::mt19937_64 rng(21);
  RealPolynomial h = half_square(2);
  h.add_term({1, 1}, 0.3);
  h.add_term({3, 0}, 0.1);
  const NearIntegrableSystem sys(h, testing::random_fourier(rng, 2), 0.01, 1.0);
  CHECK(transform_system(sys, IntMatrix::Identity(2, 2)).f() == sys.f());
  CHECK(transform_system(sys, IntMatrix::Identity(2, 2)).h() == sys.h());

  const IntMatrix a = rows({{1, -1}, {0, 1}});
  const NearIntegrableSystem t = transform_system(sys, a);
  const Matrix ar = to_real(a);
  const Matrix a_inv_t = to_real(integer_inverse(a)).transpose();
  for (int i = 0; i < 100; ++i) {
    const Vector th = testing::uniform(rng, 2, 0, 1);
    const Vector I = testing::uniform(rng, 2, -0.5, 0.5);
    const Vector th2 = ar * th;
    const Vector I2 = a_inv_t * I;
    CHECK(std::abs(t.energy(th2, I2) - sys.energy(th, I)) < 1e-12);
    CHECK((t.frequency(I2) - ar * sys.frequency(I)).cwiseAbs().maxCoeff() < 1e-10);
  }
  const NearIntegrableSystem back = transform_system(t, integer_inverse(a));
  CHECK(back.f() == sys.f());
}

TEST_CASE("resonance data for the shipped examples") {
  const Preset p = pendulum();
  CHECK(p.resonance.d == 1);
  CHECK(p.resonance.omega_tilde.size() == 1);
  CHECK(p.resonance.omega_tilde[0] == doctest::Approx(1.0));
  p.resonance.validate();

  const Preset q = control_nonresonant();
  CHECK(q.resonance.d == 0);
  CHECK_THROWS_AS(q.resonance.validate(false), ValidationError);
  q.resonance.validate(true);

  const Preset g = golden();
  CHECK(g.resonance.d == 1);
  CHECK(g.resonance.omega_tilde.size() == 2);

  // (1,1): adapted frame maps omega to (0, 1)
  const NearIntegrableSystem diag(half_square(2), cosine_mode(2, {1, -1}, 0.1), 1e-3, 2.0);
  const ResonanceData r = resonance_from_rational(diag, vec({1, 1}), {Rational(1), Rational(1)});
  CHECK(r.d == 1);
  CHECK((to_real(r.adaptation) * r.omega).head(1).cwiseAbs().maxCoeff() < 1e-12);
  // I* mismatching grad h is rejected
  CHECK_THROWS_AS(resonance_from_rational(diag, vec({1, 2}), {Rational(1), Rational(1)}), ValidationError);
}
