#include "microdrift/lattice.hpp"

#include "microdrift/errors.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace microdrift {

namespace {

__extension__ typedef __int128 i128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw NumericError("integer overflow in lattice arithmetic");
  return static_cast<std::int64_t>(v);
}

struct Bezout {
  std::int64_t g, p, q;  // p a + q b = g >= 0
};

Bezout ext_gcd(std::int64_t a, std::int64_t b) {
  if (a != 0 && b % a == 0) return {a < 0 ? -a : a, a < 0 ? -1 : 1, 0};
  std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = narrow(static_cast<i128>(old_s) - static_cast<i128>(q) * s);
    old_s = s;
    s = tmp;
    tmp = narrow(static_cast<i128>(old_t) - static_cast<i128>(q) * t);
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

// cols (i, j) <- (p ci + q cj, u ci + v cj)
void combine_columns(IntMatrix& m, Eigen::Index i, Eigen::Index j, std::int64_t p, std::int64_t q, std::int64_t u,
                     std::int64_t v) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const i128 ci = m(r, i), cj = m(r, j);
    m(r, i) = narrow(p * ci + q * cj);
    m(r, j) = narrow(u * ci + v * cj);
  }
}

void combine_rows(IntMatrix& m, Eigen::Index i, Eigen::Index j, std::int64_t p, std::int64_t q, std::int64_t u,
                  std::int64_t v) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const i128 ri = m(i, c), rj = m(j, c);
    m(i, c) = narrow(p * ri + q * rj);
    m(j, c) = narrow(u * ri + v * rj);
  }
}

struct ColumnReduction {
  IntMatrix lower;    // m V, zero right of the diagonal
  IntMatrix v;        // unimodular
  IntMatrix v_inv;
};

// Unimodular column operations bringing m (r x n, r <= n) to [L | 0] with L
// lower triangular.
ColumnReduction column_reduce(const IntMatrix& m) {
  const Eigen::Index rows = m.rows(), n = m.cols();
  ColumnReduction out{m, IntMatrix::Identity(n, n), IntMatrix::Identity(n, n)};
  for (Eigen::Index i = 0; i < rows && i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const std::int64_t a = out.lower(i, i), b = out.lower(i, j);
      if (b == 0) continue;
      const Bezout bz = ext_gcd(a, b);
      const std::int64_t ag = a / bz.g, bg = b / bz.g;
      combine_columns(out.lower, i, j, bz.p, bz.q, -bg, ag);
      combine_columns(out.v, i, j, bz.p, bz.q, -bg, ag);
      // inverse of [[p, -b/g], [q, a/g]] acting on rows of V^{-1}
      combine_rows(out.v_inv, i, j, ag, bg, -bz.q, bz.p);
    }
  }
  return out;
}

bool same_matrix(const IntMatrix& a, const IntMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw ValidationError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Rational { throw ValidationError("not an exact rational: '" + std::string(text) + "'"); };
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) fail();
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(std::string(s), &pos);
    } catch (const std::exception&) {
      fail();
    }
    if (pos != s.size()) fail();
    return v;
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos)
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string digits = std::string(text.substr(0, dot)) + std::string(text.substr(dot + 1));
    const std::size_t frac = text.size() - dot - 1;
    if (frac > 18) fail();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac; ++i) den *= 10;
    return Rational(parse_int(digits), den);
  }
  return Rational(parse_int(text));
}

IntMatrix hermite_normal_form(const IntMatrix& input) {
  IntMatrix m = input;
  const Eigen::Index rows = m.rows(), cols = m.cols();
  Eigen::Index pivot_row = 0;
  for (Eigen::Index c = 0; c < cols && pivot_row < rows; ++c) {
    for (Eigen::Index r = pivot_row + 1; r < rows; ++r) {
      const std::int64_t a = m(pivot_row, c), b = m(r, c);
      if (b == 0) continue;
      const Bezout bz = ext_gcd(a, b);
      combine_rows(m, pivot_row, r, bz.p, bz.q, -b / bz.g, a / bz.g);
    }
    if (m(pivot_row, c) == 0) continue;
    if (m(pivot_row, c) < 0) m.row(pivot_row) *= -1;
    const std::int64_t piv = m(pivot_row, c);
    for (Eigen::Index r = 0; r < pivot_row; ++r) {
      std::int64_t q = m(r, c) / piv;
      if (m(r, c) - q * piv < 0) --q;
      if (q != 0)
        for (Eigen::Index k = 0; k < cols; ++k) m(r, k) = narrow(static_cast<i128>(m(r, k)) - static_cast<i128>(q) * m(pivot_row, k));
    }
    ++pivot_row;
  }
  return m.topRows(pivot_row);
}

IntMatrix resonant_module(const std::vector<Rational>& omega) {
  const auto n = static_cast<Eigen::Index>(omega.size());
  if (n < 2) throw ValidationError("frequency vector needs n >= 2 components");
  std::int64_t lcm = 1;
  for (const auto& q : omega) lcm = narrow(static_cast<i128>(lcm) / std::gcd(lcm, q.den) * q.den);
  IntMatrix row(1, n);
  bool nonzero = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& q = omega[static_cast<std::size_t>(i)];
    row(0, i) = narrow(static_cast<i128>(q.num) * (lcm / q.den));
    nonzero = nonzero || row(0, i) != 0;
  }
  if (!nonzero) throw ValidationError("frequency omega = 0 (the resonant point must have non-zero frequency)");
  const ColumnReduction cr = column_reduce(row);
  // Columns 1..n-1 of V annihilate the row vector and span a saturated lattice.
  IntMatrix kernel = cr.v.rightCols(n - 1).transpose();
  if (kernel.rows() == 0) throw AssumptionError("omega is non-resonant: no integer relation k.omega = 0");
  return hermite_normal_form(kernel);
}

std::int64_t determinant(const IntMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("determinant of a non-square matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) return 1;
  std::vector<std::vector<i128>> m(static_cast<std::size_t>(n), std::vector<i128>(static_cast<std::size_t>(n)));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = a(i, j);
  // Bareiss fraction-free elimination.
  i128 prev = 1;
  int sign = 1;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t k = 0; k + 1 < un; ++k) {
    if (m[k][k] == 0) {
      std::size_t swap = k + 1;
      while (swap < un && m[swap][k] == 0) ++swap;
      if (swap == un) return 0;
      std::swap(m[k], m[swap]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < un; ++i)
      for (std::size_t j = k + 1; j < un; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return narrow(sign * m[un - 1][un - 1]);
}

IntMatrix integer_inverse(const IntMatrix& a) {
  const std::int64_t det = determinant(a);
  if (det != 1 && det != -1) throw ValidationError("matrix is not unimodular (det = " + std::to_string(det) + ")");
  const Eigen::Index n = a.rows();
  // A V = L lower triangular with unit-modulus diagonal, so A^{-1} = V L^{-1}.
  const ColumnReduction cr = column_reduce(a);
  IntMatrix l_inv = IntMatrix::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    // Solve L x = e_c by forward substitution.
    for (Eigen::Index r = 0; r < n; ++r) {
      i128 s = (r == c) ? 1 : 0;
      for (Eigen::Index k = 0; k < r; ++k) s -= static_cast<i128>(cr.lower(r, k)) * l_inv(k, c);
      const std::int64_t diag = cr.lower(r, r);
      if (diag != 1 && diag != -1) throw NumericError("column reduction of a unimodular matrix lost unimodularity");
      l_inv(r, c) = narrow(s * diag);
    }
  }
  IntMatrix inv = IntMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      i128 s = 0;
      for (Eigen::Index k = 0; k < n; ++k) s += static_cast<i128>(cr.v(i, k)) * l_inv(k, j);
      inv(i, j) = narrow(s);
    }
  if ((a * inv) != IntMatrix::Identity(n, n)) throw NumericError("integer inverse failed verification");
  return inv;
}

IntMatrix unimodular_adaptation(const IntMatrix& basis) {
  const Eigen::Index d = basis.rows(), n = basis.cols();
  if (d < 1 || d >= n) throw ValidationError("resonant basis must have between 1 and n-1 rows");
  const ColumnReduction cr = column_reduce(basis);
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::int64_t diag = cr.lower(i, i);
    if (diag == 0) throw ValidationError("resonant basis rows are linearly dependent");
    if (diag != 1 && diag != -1)
      throw ValidationError("resonant basis does not generate a saturated lattice; cannot complete to a unimodular matrix");
  }
  IntMatrix a(n, n);
  a.topRows(d) = basis;
  a.bottomRows(n - d) = cr.v_inv.bottomRows(n - d);
  const std::int64_t det = determinant(a);
  if (det != 1 && det != -1) throw NumericError("unimodular completion failed (det = " + std::to_string(det) + ")");
  return a;
}

Matrix to_real(const IntMatrix& a) { return a.cast<double>(); }

void ResonanceData::validate(bool allow_nonresonant) const {
  const auto nn = static_cast<Eigen::Index>(n());
  if (nn < 2) throw ValidationError("resonance: n >= 2 required");
  if (omega.size() != nn) throw ValidationError("resonance: omega has wrong length");
  if (sup_norm(omega) == 0.0) throw ValidationError("resonance: omega = 0");
  if (d < 0 || d >= nn || (d == 0 && !allow_nonresonant))
    throw ValidationError("resonance: d must lie in [1, n-1], got " + std::to_string(d));
  if (adaptation.rows() != nn || adaptation.cols() != nn) throw ValidationError("resonance: A has wrong shape");
  const std::int64_t det = determinant(adaptation);
  if (det != 1 && det != -1) throw ValidationError("resonance: |det A| != 1");
  if (adaptation * adaptation_inverse != IntMatrix::Identity(nn, nn))
    throw ValidationError("resonance: stored inverse does not match A");
  if (lambda_basis.rows() != d || (d > 0 && lambda_basis.cols() != nn))
    throw ValidationError("resonance: Lambda basis has wrong shape");
  const double tol = 1e-12 * std::max(1.0, sup_norm(omega));
  for (Eigen::Index r = 0; r < d; ++r) {
    const double dot = lambda_basis.row(r).cast<double>().dot(omega);
    if (std::abs(dot) >= tol) throw ValidationError("resonance: basis row is not orthogonal to omega");
  }
  if (d > 0 && !same_matrix(hermite_normal_form(lambda_basis), hermite_normal_form(adaptation.topRows(d))))
    throw ValidationError("resonance: first d rows of A do not span the resonant lattice");
  const Vector aw = to_real(adaptation) * omega;
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(aw[i]) >= tol) throw ValidationError("resonance: (A omega)_i != 0 for i <= d");
  if (omega_tilde.size() != nn - d) throw ValidationError("resonance: omega_tilde has wrong length");
}

Vector ResonanceData::to_adapted_angles(const Vector& theta) const {
  return reduce_angles(to_real(adaptation) * theta);
}

Vector ResonanceData::from_adapted_angles(const Vector& theta_adapted) const {
  return reduce_angles(to_real(adaptation_inverse) * theta_adapted);
}

Vector ResonanceData::to_adapted_actions(const Vector& action) const {
  return adapted_displacement(action - i_star);
}

Vector ResonanceData::from_adapted_actions(const Vector& action_adapted) const {
  return i_star + to_real(adaptation).transpose() * action_adapted;
}

Vector ResonanceData::adapted_displacement(const Vector& delta) const {
  return to_real(adaptation_inverse).transpose() * delta;
}

ResonanceData resonance_from_rational(const NearIntegrableSystem& system, const Vector& i_star,
                                      const std::vector<Rational>& omega) {
  const std::size_t n = system.n();
  if (omega.size() != n || static_cast<std::size_t>(i_star.size()) != n)
    throw ValidationError("resonance: I* and omega must have length n = " + std::to_string(n));
  ResonanceData r;
  r.i_star = i_star;
  r.omega = Vector(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) r.omega[static_cast<Eigen::Index>(i)] = omega[i].value();
  const Vector w = system.frequency(i_star);
  if (sup_norm(w - r.omega) > 1e-10 * std::max(1.0, sup_norm(r.omega)))
    throw ValidationError("resonance: grad h(I*) does not equal the declared omega");
  r.lambda_basis = resonant_module(omega);
  r.d = static_cast<int>(r.lambda_basis.rows());
  r.adaptation = unimodular_adaptation(r.lambda_basis);
  r.adaptation_inverse = integer_inverse(r.adaptation);
  const Vector aw = to_real(r.adaptation) * r.omega;
  r.omega_tilde = aw.tail(static_cast<Eigen::Index>(n) - r.d);
  r.validate();
  return r;
}

ResonanceData resonance_from_adapted(const NearIntegrableSystem& system, const Vector& i_star, int d,
                                     const Vector& omega_tilde, bool allow_nonresonant) {
  const auto n = static_cast<Eigen::Index>(system.n());
  if (i_star.size() != n) throw ValidationError("resonance: I* must have length n");
  if (d < 0 || d >= n) throw ValidationError("resonance: d must lie in [1, n-1]");
  if (omega_tilde.size() != n - d) throw ValidationError("resonance: omega_tilde must have n - d components");
  ResonanceData r;
  r.i_star = i_star;
  r.d = d;
  r.omega = Vector::Zero(n);
  r.omega.tail(n - d) = omega_tilde;
  r.omega_tilde = omega_tilde;
  r.lambda_basis = IntMatrix::Identity(n, n).topRows(d);
  r.adaptation = IntMatrix::Identity(n, n);
  r.adaptation_inverse = IntMatrix::Identity(n, n);
  const Vector w = system.frequency(i_star);
  if (sup_norm(w - r.omega) > 1e-10 * std::max(1.0, sup_norm(r.omega)))
    throw ValidationError("resonance: grad h(I*) does not equal (0, omega_tilde)");
  r.validate(allow_nonresonant);
  return r;
}

NearIntegrableSystem shift_actions(const NearIntegrableSystem& system, const Vector& shift) {
  const auto n = static_cast<Eigen::Index>(system.n());
  if (shift.size() != n) throw ValidationError("action shift has wrong length");
  const Matrix id = Matrix::Identity(n, n);
  RealPolynomial h = system.h().compose_affine(id, shift);
  FourierPerturbation f(system.n());
  for (const auto& [k, c] : system.f().coefficients()) f.add_mode(k, c.compose_affine(id, shift));
  return NearIntegrableSystem(std::move(h), std::move(f), system.epsilon(), system.domain_radius());
}

NearIntegrableSystem transform_system(const NearIntegrableSystem& system, const IntMatrix& a) {
  const auto n = static_cast<Eigen::Index>(system.n());
  if (a.rows() != n || a.cols() != n) throw ValidationError("transform matrix has wrong shape");
  const IntMatrix a_inv = integer_inverse(a);
  const Matrix at = to_real(a).transpose();
  const Vector zero = Vector::Zero(n);
  RealPolynomial h = system.h().compose_affine(at, zero);
  FourierPerturbation f(system.n());
  const IntMatrix a_inv_t = a_inv.transpose();
  for (const auto& [k, c] : system.f().coefficients()) {
    Mode kp(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::int64_t s = 0;
      for (Eigen::Index j = 0; j < n; ++j) s += a_inv_t(i, j) * k[static_cast<std::size_t>(j)];
      if (s > std::numeric_limits<int>::max() || s < std::numeric_limits<int>::min())
        throw NumericError("transformed mode index overflows");
      kp[static_cast<std::size_t>(i)] = static_cast<int>(s);
    }
    f.add_mode(kp, c.compose_affine(at, zero));
  }
  return NearIntegrableSystem(std::move(h), std::move(f), system.epsilon(), system.domain_radius());
}

NearIntegrableSystem adapted_system(const NearIntegrableSystem& system, const ResonanceData& resonance) {
  return transform_system(shift_actions(system, resonance.i_star), resonance.adaptation);
}

}  // namespace microdrift
