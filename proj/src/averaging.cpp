#include "microdrift/averaging.hpp"

#include "microdrift/errors.hpp"

#include <cmath>
#include <limits>

namespace microdrift {

namespace {

double phase(const Mode& k, const Vector& theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += k[i] * theta[static_cast<Eigen::Index>(i)];
  return kTwoPi * s;
}

double row_sum_norm(const Matrix& m) { return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Lexicographic walk (last coordinate fastest) over an m^d grid of T^d.
template <typename F>
void scan_grid(std::size_t d, int m, F&& visit) {
  std::vector<int> idx(d, 0);
  Vector theta(static_cast<Eigen::Index>(d));
  while (true) {
    for (std::size_t i = 0; i < d; ++i) theta[static_cast<Eigen::Index>(i)] = static_cast<double>(idx[i]) / m;
    visit(theta);
    std::size_t pos = d;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < m) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
    if (d == 0) return;
  }
}

}  // namespace

void TrigPolynomial::add_mode(const Mode& k, std::complex<double> c) {
  if (k.size() != dim_) throw ValidationError("trigonometric mode has wrong dimension");
  auto& slot = modes_[k];
  slot += c;
  if (slot == 0.0) modes_.erase(k);
}

bool TrigPolynomial::is_constant() const {
  for (const auto& [k, c] : modes_)
    if (sup_norm(k) != 0 && c != 0.0) return false;
  return true;
}

double TrigPolynomial::value(const Vector& theta) const {
  double s = 0.0;
  for (const auto& [k, c] : modes_) s += (c * std::polar(1.0, phase(k, theta))).real();
  return s;
}

Vector TrigPolynomial::gradient(const Vector& theta) const {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& [k, c] : modes_) {
    const double im = (c * std::polar(1.0, phase(k, theta))).imag();
    for (std::size_t j = 0; j < dim_; ++j) g[static_cast<Eigen::Index>(j)] -= kTwoPi * k[j] * im;
  }
  return g;
}

Matrix TrigPolynomial::hessian(const Vector& theta) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix h = Matrix::Zero(d, d);
  for (const auto& [k, c] : modes_) {
    const double re = (c * std::polar(1.0, phase(k, theta))).real();
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        h(a, b) -= kTwoPi * kTwoPi * k[static_cast<std::size_t>(a)] * k[static_cast<std::size_t>(b)] * re;
  }
  return h;
}

Matrix TrigPolynomial::third_slice(const Vector& theta, std::size_t j) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix t = Matrix::Zero(d, d);
  const double c3 = kTwoPi * kTwoPi * kTwoPi;
  for (const auto& [k, c] : modes_) {
    // (i 2 pi)^3 k_j k_a k_b c e^{i phi}, real part = c3 k_j k_a k_b Im(c e^{i phi})
    const double im = (c * std::polar(1.0, phase(k, theta))).imag();
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        t(a, b) += c3 * k[j] * k[static_cast<std::size_t>(a)] * k[static_cast<std::size_t>(b)] * im;
  }
  return t;
}

double AveragedPerturbation::tau(double epsilon) const {
  if (!(epsilon > 0.0)) throw ValidationError("tau requires eps > 0");
  return delta / std::sqrt(epsilon);
}

FourierPerturbation resonant_average(const FourierPerturbation& f, int d) {
  if (d < 0 || static_cast<std::size_t>(d) > f.dim()) throw ValidationError("resonant dimension out of range");
  return f.filtered([d](const Mode& k) {
    for (std::size_t i = static_cast<std::size_t>(d); i < k.size(); ++i)
      if (k[i] != 0) return false;
    return true;
  });
}

TrigPolynomial restrict_to_resonant_point(const FourierPerturbation& f_omega, int d) {
  TrigPolynomial out(static_cast<std::size_t>(d));
  const Vector origin = Vector::Zero(static_cast<Eigen::Index>(f_omega.dim()));
  for (const auto& [k, c] : f_omega.coefficients()) {
    for (std::size_t i = static_cast<std::size_t>(d); i < k.size(); ++i)
      if (k[i] != 0) throw ValidationError("restriction expects a resonant average (non-resonant mode present)");
    out.add_mode(Mode(k.begin(), k.begin() + d), c.eval(origin));
  }
  return out;
}

double time_average_oracle(const FourierPerturbation& f, const Vector& omega, const Vector& theta,
                           const Vector& action, double t_final) {
  if (!(t_final > 0.0)) throw ValidationError("time average needs T > 0");
  double fastest = 1.0;
  for (const auto& [k, c] : f.coefficients()) {
    double kw = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) kw += k[i] * omega[static_cast<Eigen::Index>(i)];
    fastest = std::max(fastest, std::abs(kw));
  }
  auto intervals = static_cast<long long>(std::ceil(64.0 * fastest * t_final));
  if (intervals % 2) ++intervals;
  const double h = t_final / static_cast<double>(intervals);
  double sum = 0.0;
  for (long long i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f.eval(theta + (static_cast<double>(i) * h) * omega, action);
  }
  return sum * h / 3.0 / t_final;
}

ThetaStar locate_theta_star(const TrigPolynomial& f_star) {
  const std::size_t d = f_star.dim();
  ThetaStar out;
  out.theta = Vector::Zero(static_cast<Eigen::Index>(d));
  if (d == 0 || f_star.is_constant()) return out;

  double best = -1.0;
  scan_grid(d, 64, [&](const Vector& theta) {
    const double v = sup_norm(f_star.gradient(theta));
    if (v > best + 1e-12 * std::max(1.0, best)) {
      best = v;
      out.theta = theta;
    }
  });

  Vector theta = out.theta;
  double value = best;
  for (int iter = 0; iter < 50; ++iter) {
    const Vector g = f_star.gradient(theta);
    Eigen::Index j = 0;
    g.cwiseAbs().maxCoeff(&j);
    const double s = g[j] >= 0.0 ? 1.0 : -1.0;
    // Maximise phi = s * d_j f: gradient s * H_j, Hessian s * T_j.
    const Vector grad_phi = s * f_star.hessian(theta).row(j).transpose();
    const Matrix hess_phi = s * f_star.third_slice(theta, static_cast<std::size_t>(j));
    if (grad_phi.norm() == 0.0) break;
    Vector step;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hess_phi);
    if (eig.eigenvalues().maxCoeff() < 0.0) {
      step = -hess_phi.ldlt().solve(grad_phi);
    } else {
      const double scale = std::max(1e-12, eig.eigenvalues().cwiseAbs().maxCoeff());
      step = grad_phi / scale;
    }
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Vector candidate = reduce_angles(theta + step);
      const double v = sup_norm(f_star.gradient(candidate));
      if (v > value) {
        theta = candidate;
        value = v;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  out.theta = theta;
  out.lambda = value;
  return out;
}

double hessian_bound(const TrigPolynomial& f_star, int grid) {
  if (grid < 1) throw ValidationError("Hessian grid must be positive");
  double best = 0.0;
  if (f_star.dim() == 0) return best;
  scan_grid(f_star.dim(), grid, [&](const Vector& theta) { best = std::max(best, row_sum_norm(f_star.hessian(theta))); });
  return best;
}

ProofConstants derive_constants(double lambda, double hessian_bound_value, double epsilon) {
  if (!(lambda > 0.0)) throw AssumptionError("resonant average is constant (lambda = 0): no drift mechanism");
  if (!(hessian_bound_value > 0.0)) throw ValidationError("Hessian bound L must be positive");
  if (!(epsilon > 0.0)) throw ValidationError("eps must be positive");
  ProofConstants pc;
  pc.delta = std::sqrt(lambda / (6.0 * hessian_bound_value));
  pc.tau = pc.delta / std::sqrt(epsilon);
  pc.c = lambda * pc.delta / 8.0;
  return pc;
}

AveragedPerturbation average(const NearIntegrableSystem& adapted, int d) {
  AveragedPerturbation avg;
  avg.d = d;
  avg.f_omega = resonant_average(adapted.f(), d);
  avg.f_omega_star = restrict_to_resonant_point(avg.f_omega, d);
  const ThetaStar ts = locate_theta_star(avg.f_omega_star);
  avg.theta_star = ts.theta;
  avg.lambda = ts.lambda;
  avg.hessian_bound = hessian_bound(avg.f_omega_star);
  if (avg.non_constant()) {
    const ProofConstants pc = derive_constants(avg.lambda, avg.hessian_bound, 1.0);
    avg.delta = pc.delta;
    avg.c = pc.c;
  }
  return avg;
}

}  // namespace microdrift
