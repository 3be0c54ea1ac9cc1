#include "microdrift/small_divisors.hpp"

#include "microdrift/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace microdrift {

namespace {

// min |k.w| bucketed by |k|, for every nonzero k with |k| <= q_max. Only one
// of each +-k pair is visited (first nonzero component positive).
std::vector<double> shell_minima(const Vector& w, int q_max) {
  const auto m = static_cast<std::size_t>(w.size());
  std::vector<double> shell(static_cast<std::size_t>(q_max) + 1, std::numeric_limits<double>::infinity());
  std::vector<int> k(m, -q_max);
  while (true) {
    int norm = 0;
    int first = 0;
    for (std::size_t i = 0; i < m; ++i) {
      norm = std::max(norm, std::abs(k[i]));
      if (first == 0) first = k[i];
    }
    if (first > 0) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += k[i] * w[static_cast<Eigen::Index>(i)];
      const double div = std::abs(dot);
      if (div < kHiddenResonanceFloor) {
        std::string ks;
        for (std::size_t i = 0; i < m; ++i) ks += (i ? "," : "") + std::to_string(k[i]);
        throw HiddenResonanceError("hidden resonance: |k.w~| < 1e-14 for k = (" + ks + ")");
      }
      double& slot = shell[static_cast<std::size_t>(norm)];
      if (div < slot) slot = div;
    }
    std::size_t d = 0;
    while (d < m && ++k[d] > q_max) k[d++] = -q_max;
    if (d == m) break;
  }
  return shell;
}

void check_omega(const Vector& w) {
  if (w.size() < 1) throw ValidationError("omega_tilde must have at least one component");
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!std::isfinite(w[i])) throw ValidationError("omega_tilde must be finite");
}

}  // namespace

double psi(const Vector& omega_tilde, int q) {
  check_omega(omega_tilde);
  if (q < 1) throw ValidationError("Psi(Q) requires Q >= 1");
  const auto shell = shell_minima(omega_tilde, q);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 1; s <= q; ++s) best = std::min(best, shell[static_cast<std::size_t>(s)]);
  return 1.0 / best;
}

SmallDivisorProfile::SmallDivisorProfile(Vector omega_tilde, int q_max, double kappa)
    : omega_tilde_(std::move(omega_tilde)), q_max_(q_max), kappa_(kappa) {
  check_omega(omega_tilde_);
  if (q_max_ < 1) throw ValidationError("Q_max must be >= 1");
  if (!(kappa_ > 0.0)) throw ValidationError("kappa must be positive");
  min_div_ = shell_minima(omega_tilde_, q_max_);
  for (int q = 2; q <= q_max_; ++q)
    min_div_[static_cast<std::size_t>(q)] =
        std::min(min_div_[static_cast<std::size_t>(q)], min_div_[static_cast<std::size_t>(q - 1)]);
}

SmallDivisorProfile SmallDivisorProfile::covering(const Vector& omega_tilde, double kappa, double x_max,
                                                  int q_start) {
  // Exhaustive search is O(Q^m); cap the table at roughly 5e7 lattice points.
  const double m = static_cast<double>(omega_tilde.size());
  const int cap = static_cast<int>(std::min(1e7, std::pow(5e7, 1.0 / m) / 2.0));
  for (int q = std::max(1, q_start);; q *= 2) {
    q = std::min(q, cap);
    SmallDivisorProfile profile(omega_tilde, q, kappa);
    try {
      if (x_max >= profile.psi(1)) profile.delta(x_max);
      return profile;
    } catch (const QmaxExceededError&) {
      if (q >= cap) throw;
    }
  }
}

double SmallDivisorProfile::min_divisor(int q) const {
  if (q < 1 || q > q_max_)
    throw QmaxExceededError("Psi requested at Q = " + std::to_string(q) + " outside the table [1, " +
                            std::to_string(q_max_) + "]; increase Q_max");
  return min_div_[static_cast<std::size_t>(q)];
}

double SmallDivisorProfile::psi(int q) const { return 1.0 / min_divisor(q); }

double SmallDivisorProfile::delta(double x) const {
  const double psi1 = psi(1);
  if (!(x >= psi1))
    throw ValidationError("Delta(x) is defined for x >= Psi(1) = " + std::to_string(psi1) + ", got " +
                          std::to_string(x));
  double best = 1.0;
  int q = 1;
  for (; q <= q_max_; ++q) {
    const double p = psi(q);
    if (q * p > x) break;
    best = std::max(best, std::min(static_cast<double>(q) + 1.0, x / p));
  }
  if (q > q_max_ && x / psi(q_max_) >= q_max_ + 1.0)
    throw QmaxExceededError("Delta(" + std::to_string(x) + ") exceeds Q_max = " + std::to_string(q_max_) +
                            "; increase Q_max");
  return best;
}

double SmallDivisorProfile::mu(double sqrt_eps) const {
  if (sqrt_eps < 0.0) throw ValidationError("sqrt(eps) must be >= 0");
  if (sqrt_eps == 0.0) return 0.0;
  return 1.0 / delta(kappa_ / sqrt_eps);
}

}  // namespace microdrift
