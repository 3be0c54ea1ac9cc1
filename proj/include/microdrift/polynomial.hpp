#pragma once

#include "microdrift/errors.hpp"
#include "microdrift/types.hpp"

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <type_traits>
#include <utility>

namespace microdrift {

/// Sparse multivariate polynomial sum_alpha c_alpha x^alpha.
///
/// Coefficients may be real or complex. Derivatives are formed term by term
/// and are therefore exact; terms whose coefficient becomes exactly zero are
/// dropped so that structural equality is meaningful.
template <typename T>
class Polynomial {
 public:
  using Scalar = T;
  using TermMap = std::map<MultiIndex, T>;

  Polynomial() = default;
  explicit Polynomial(std::size_t dim) : dim_(dim) {}

  static Polynomial constant(std::size_t dim, T value) {
    Polynomial p(dim);
    p.add_term(MultiIndex(dim, 0), value);
    return p;
  }

  static Polynomial variable(std::size_t dim, std::size_t i) {
    Polynomial p(dim);
    MultiIndex alpha(dim, 0);
    alpha.at(i) = 1;
    p.add_term(alpha, T(1));
    return p;
  }

  std::size_t dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [alpha, c] : terms_) {
      int s = 0;
      for (int a : alpha) s += a;
      d = std::max(d, s);
    }
    return d;
  }

  /// Adds c x^alpha to the polynomial, merging with an existing term.
  void add_term(const MultiIndex& alpha, T coeff) {
    if (alpha.size() != dim_)
      throw ValidationError("monomial has " + std::to_string(alpha.size()) +
                            " exponents, polynomial has dimension " + std::to_string(dim_));
    for (int a : alpha)
      if (a < 0) throw ValidationError("negative exponent in monomial");
    auto [it, inserted] = terms_.try_emplace(alpha, coeff);
    if (!inserted) it->second += coeff;
    if (it->second == T(0)) terms_.erase(it);
  }

  T eval(const Vector& x) const {
    check_dim(x);
    T sum(0);
    for (const auto& [alpha, c] : terms_) sum += c * monomial(alpha, x);
    return sum;
  }

  Polynomial derivative(std::size_t var) const {
    Polynomial d(dim_);
    for (const auto& [alpha, c] : terms_) {
      if (alpha[var] == 0) continue;
      MultiIndex beta = alpha;
      --beta[var];
      d.add_term(beta, c * static_cast<double>(alpha[var]));
    }
    return d;
  }

  Polynomial derivative(const MultiIndex& order) const {
    Polynomial d = *this;
    for (std::size_t v = 0; v < order.size(); ++v)
      for (int r = 0; r < order[v]; ++r) d = d.derivative(v);
    return d;
  }

  /// p(x + dx) - p(x), evaluated by telescoping each monomial so that the
  /// constant and large low-order parts never cancel numerically.
  T difference(const Vector& x, const Vector& dx) const {
    check_dim(x);
    check_dim(dx);
    T sum(0);
    for (const auto& [alpha, c] : terms_) {
      T acc(0);
      for (std::size_t j = 0; j < dim_; ++j) {
        if (alpha[j] == 0) continue;
        double lead = 1.0;  // prod_{i<j} (x_i + dx_i)^alpha_i
        for (std::size_t i = 0; i < j; ++i) lead *= ipow(x[i] + dx[i], alpha[i]);
        double tail = 1.0;  // prod_{i>j} x_i^alpha_i
        for (std::size_t i = j + 1; i < dim_; ++i) tail *= ipow(x[i], alpha[i]);
        // (a+b)^m - a^m = b * sum_{r<m} (a+b)^r a^(m-1-r)
        const double a = x[j];
        const double ab = x[j] + dx[j];
        double inner = 0.0;
        for (int r = 0; r < alpha[j]; ++r) inner += ipow(ab, r) * ipow(a, alpha[j] - 1 - r);
        acc += T(lead * dx[j] * inner * tail);
      }
      sum += c * acc;
    }
    return sum;
  }

  /// q(y) = p(M y + s) where M has dim() rows.
  Polynomial compose_affine(const Matrix& m, const Vector& s) const {
    if (static_cast<std::size_t>(m.rows()) != dim_ || static_cast<std::size_t>(s.size()) != dim_)
      throw ValidationError("affine map does not match polynomial dimension");
    const std::size_t out_dim = static_cast<std::size_t>(m.cols());
    std::vector<Polynomial> linear;
    linear.reserve(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      Polynomial li(out_dim);
      for (std::size_t j = 0; j < out_dim; ++j)
        if (m(i, j) != 0.0) li += Polynomial::variable(out_dim, j) * T(m(i, j));
      if (s[i] != 0.0) li += Polynomial::constant(out_dim, T(s[i]));
      linear.push_back(std::move(li));
    }
    Polynomial out(out_dim);
    for (const auto& [alpha, c] : terms_) {
      Polynomial term = Polynomial::constant(out_dim, c);
      for (std::size_t i = 0; i < dim_; ++i)
        for (int r = 0; r < alpha[i]; ++r) term = term * linear[i];
      out += term;
    }
    return out;
  }

  template <typename F>
  auto map_coefficients(F&& fn) const {
    using U = std::decay_t<std::invoke_result_t<F, T>>;
    Polynomial<U> out(dim_);
    for (const auto& [alpha, c] : terms_) out.add_term(alpha, fn(c));
    return out;
  }

  Polynomial& operator+=(const Polynomial& other) {
    if (other.dim_ != dim_) throw ValidationError("polynomial dimension mismatch");
    for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
    return *this;
  }

  Polynomial& operator*=(T scale) {
    if (scale == T(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [alpha, c] : terms_) c *= scale;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) {
    Polynomial nb = b;
    nb *= T(-1);
    return a += nb;
  }
  friend Polynomial operator*(Polynomial a, T scale) { return a *= scale; }
  friend Polynomial operator*(T scale, Polynomial a) { return a *= scale; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.dim_ != b.dim_) throw ValidationError("polynomial dimension mismatch");
    Polynomial out(a.dim_);
    for (const auto& [alpha, ca] : a.terms_)
      for (const auto& [beta, cb] : b.terms_) {
        MultiIndex gamma(a.dim_);
        for (std::size_t i = 0; i < a.dim_; ++i) gamma[i] = alpha[i] + beta[i];
        out.add_term(gamma, ca * cb);
      }
    return out;
  }

  bool operator==(const Polynomial& other) const = default;

 private:
  static double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  }

  static double monomial(const MultiIndex& alpha, const Vector& x) {
    double r = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) r *= ipow(x[static_cast<Eigen::Index>(i)], alpha[i]);
    return r;
  }

  void check_dim(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim_)
      throw ValidationError("expected a vector of length " + std::to_string(dim_) + ", got " +
                            std::to_string(x.size()));
  }

  std::size_t dim_ = 0;
  TermMap terms_;
};

using RealPolynomial = Polynomial<double>;
using ComplexPolynomial = Polynomial<std::complex<double>>;

/// Coefficientwise complex conjugate.
inline ComplexPolynomial conj(const ComplexPolynomial& p) {
  return p.map_coefficients([](std::complex<double> c) { return std::conj(c); });
}

}  // namespace microdrift
