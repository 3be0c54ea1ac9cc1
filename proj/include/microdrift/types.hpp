#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <vector>

namespace microdrift {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Exponent vector of a monomial, one non-negative entry per variable.
using MultiIndex = std::vector<int>;

/// Integer wave vector k of a Fourier mode exp(i 2 pi k.theta).
using Mode = std::vector<int>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

inline int sup_norm(const Mode& k) {
  int m = 0;
  for (int c : k) m = std::max(m, c < 0 ? -c : c);
  return m;
}

}  // namespace microdrift
