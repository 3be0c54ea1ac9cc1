#pragma once

#include "microdrift/averaging.hpp"
#include "microdrift/fourier.hpp"
#include "microdrift/integrator.hpp"
#include "microdrift/polynomial.hpp"
#include "microdrift/types.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>

namespace testing {

using namespace microdrift;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vector uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector out(static_cast<Eigen::Index>(n));
  for (auto& x : out) x = u(rng);
  return out;
}

inline bool state_equal(const PhaseState& a, const PhaseState& b) {
  return a.theta == b.theta && a.action == b.action && a.winding == b.winding;
}

/// Random polynomial with total degree <= 3 and O(1) coefficients.
inline RealPolynomial random_polynomial(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> e(0, 3);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  RealPolynomial p(n);
  for (int t = 0; t < 6; ++t) {
    MultiIndex a(n, 0);
    int left = 3;
    for (auto& x : a) {
      x = std::min(left, e(rng));
      left -= x;
    }
    p.add_term(a, c(rng));
  }
  return p;
}

/// Random real Fourier series, |k| <= 2, with polynomial coefficients.
inline FourierPerturbation random_fourier(std::mt19937_64& rng, std::size_t n, int modes = 4) {
  std::uniform_int_distribution<int> kd(-2, 2);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  FourierPerturbation f(n);
  for (int m = 0; m < modes; ++m) {
    Mode k(n), minus(n);
    for (std::size_t i = 0; i < n; ++i) {
      k[i] = kd(rng);
      minus[i] = -k[i];
    }
    ComplexPolynomial p(n), q(n);
    for (int t = 0; t < 3; ++t) {
      MultiIndex a(n, 0);
      a[static_cast<std::size_t>(t) % n] = t;
      const std::complex<double> v(c(rng), c(rng));
      p.add_term(a, v);
      q.add_term(a, std::conj(v));
    }
    if (k == minus) {
      // k = 0: the coefficient itself must be real
      p = p.map_coefficients([](std::complex<double> z) { return std::complex<double>(z.real(), 0.0); });
      f.add_mode(k, p);
    } else {
      f.add_mode(k, p);
      f.add_mode(minus, q);
    }
  }
  return f;
}

// Walks the cube shell by shell, last component fastest, and keeps both k
// and -k. Deliberately unlike the production enumeration.
inline double psi_by_shells(const Vector& w, int q) {
  const int m = static_cast<int>(w.size());
  double best = 0.0;
  for (int s = 1; s <= q; ++s) {
    std::vector<int> k(static_cast<std::size_t>(m), s);
    while (true) {
      int norm = 0;
      for (int x : k) norm = std::max(norm, std::abs(x));
      if (norm == s) {
        double dot = 0.0;
        for (int i = 0; i < m; ++i) dot += k[static_cast<std::size_t>(i)] * w[i];
        best = std::max(best, 1.0 / std::abs(dot));
      }
      int p = m - 1;
      while (p >= 0 && --k[static_cast<std::size_t>(p)] < -s) k[static_cast<std::size_t>(p--)] = s;
      if (p < 0) break;
    }
  }
  return best;
}

// trapezoid rule over the last n - d angles, m nodes each
inline double transverse_quadrature(const FourierPerturbation& f, int d, const Vector& theta, const Vector& action,
                             int m) {
  const auto n = static_cast<int>(f.dim());
  const int free = n - d;
  std::vector<int> idx(static_cast<std::size_t>(free), 0);
  double sum = 0.0;
  long count = 0;
  while (true) {
    Vector th = theta;
    for (int j = 0; j < free; ++j) th[d + j] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / m;
    sum += f.eval(th, action);
    ++count;
    std::size_t p = 0;
    while (p < idx.size() && ++idx[p] == m) idx[p++] = 0;
    if (p == idx.size()) break;
  }
  return sum / static_cast<double>(count);
}

inline double grid_max_gradient(const TrigPolynomial& f, int m) {
  const std::size_t d = f.dim();
  std::vector<int> idx(d, 0);
  double best = 0.0;
  while (true) {
    Vector th(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) th[static_cast<Eigen::Index>(j)] = static_cast<double>(idx[j]) / m;
    best = std::max(best, f.gradient(th).cwiseAbs().maxCoeff());
    std::size_t p = 0;
    while (p < d && ++idx[p] == m) idx[p++] = 0;
    if (p == d) break;
  }
  return best;
}

}  // namespace testing
