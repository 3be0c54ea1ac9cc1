#include "microdrift/fourier.hpp"

#include "microdrift/errors.hpp"

#include <cmath>
#include <sstream>

namespace microdrift {

namespace {

std::string mode_string(const Mode& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ')';
  return os.str();
}

double phase(const Mode& k, const Vector& theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double t = theta[static_cast<Eigen::Index>(i)];
    s += k[i] * (t - std::floor(t));
  }
  return kTwoPi * s;
}

Mode negated(const Mode& k) {
  Mode m = k;
  for (int& c : m) c = -c;
  return m;
}

}  // namespace

void FourierPerturbation::add_mode(const Mode& k, const ComplexPolynomial& c) {
  if (k.size() != n_)
    throw ValidationError("mode " + mode_string(k) + " has wrong dimension, expected " + std::to_string(n_));
  if (c.dim() != n_) throw ValidationError("coefficient polynomial of mode " + mode_string(k) + " has wrong dimension");
  auto it = modes_.find(k);
  ComplexPolynomial sum = it == modes_.end() ? c : it->second.coeff + c;
  if (sum.is_zero()) {
    if (it != modes_.end()) modes_.erase(it);
    return;
  }
  Entry e;
  e.grad.reserve(n_);
  for (std::size_t j = 0; j < n_; ++j) e.grad.push_back(sum.derivative(j));
  e.coeff = std::move(sum);
  modes_[k] = std::move(e);
}

std::map<Mode, ComplexPolynomial> FourierPerturbation::coefficients() const {
  std::map<Mode, ComplexPolynomial> out;
  for (const auto& [k, e] : modes_) out.emplace(k, e.coeff);
  return out;
}

const ComplexPolynomial* FourierPerturbation::coefficient(const Mode& k) const {
  auto it = modes_.find(k);
  return it == modes_.end() ? nullptr : &it->second.coeff;
}

int FourierPerturbation::max_order() const {
  int m = 0;
  for (const auto& [k, e] : modes_) m = std::max(m, sup_norm(k));
  return m;
}

void FourierPerturbation::check_reality(double tol) const {
  for (const auto& [k, e] : modes_) {
    const Mode mk = negated(k);
    const ComplexPolynomial target = conj(e.coeff);
    auto partner = modes_.find(mk);
    const auto& lhs_terms = target.terms();
    auto mismatch = [&](const std::string& why) {
      throw ValidationError("reality violated at mode " + mode_string(k) + ": " + why);
    };
    if (partner == modes_.end()) mismatch("partner mode " + mode_string(mk) + " missing");
    const auto& rhs_terms = partner->second.coeff.terms();
    for (const auto& [alpha, c] : lhs_terms) {
      auto r = rhs_terms.find(alpha);
      const std::complex<double> other = r == rhs_terms.end() ? 0.0 : r->second;
      if (std::abs(other - c) > tol * std::max(1.0, std::abs(c))) mismatch("c_{-k} != conj(c_k)");
    }
    for (const auto& [alpha, c] : rhs_terms)
      if (!lhs_terms.count(alpha) && std::abs(c) > tol) mismatch("c_{-k} has extra monomials");
  }
}

bool FourierPerturbation::is_real(double tol) const {
  try {
    check_reality(tol);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

void FourierPerturbation::check_args(const Vector& theta, const Vector& action) const {
  if (static_cast<std::size_t>(theta.size()) != n_ || static_cast<std::size_t>(action.size()) != n_)
    throw ValidationError("angle/action vectors must have length " + std::to_string(n_));
}

std::complex<double> FourierPerturbation::eval_complex(const Vector& theta, const Vector& action) const {
  check_args(theta, action);
  std::complex<double> sum = 0.0;
  for (const auto& [k, e] : modes_) sum += e.coeff.eval(action) * std::polar(1.0, phase(k, theta));
  return sum;
}

double FourierPerturbation::eval(const Vector& theta, const Vector& action) const {
  check_args(theta, action);
  std::complex<double> sum = 0.0;
  double scale = 1.0;
  for (const auto& [k, e] : modes_) {
    const std::complex<double> c = e.coeff.eval(action);
    scale += std::abs(c);
    sum += c * std::polar(1.0, phase(k, theta));
  }
  if (std::abs(sum.imag()) > kRealityTolerance * scale)
    throw NumericError("Fourier series evaluated to a complex value; the mode table is corrupt");
  return sum.real();
}

void FourierPerturbation::gradients(const Vector& theta, const Vector& action, Vector& d_theta,
                                    Vector& d_action) const {
  check_args(theta, action);
  const auto n = static_cast<Eigen::Index>(n_);
  d_theta.setZero(n);
  d_action.setZero(n);
  for (const auto& [k, e] : modes_) {
    const std::complex<double> rot = std::polar(1.0, phase(k, theta));
    const std::complex<double> val = e.coeff.eval(action) * rot;
    // d/dtheta_j Re(c e^{i phi}) = Re(i 2 pi k_j c e^{i phi}) = -2 pi k_j Im(...)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (k[static_cast<std::size_t>(j)] != 0) d_theta[j] -= kTwoPi * k[static_cast<std::size_t>(j)] * val.imag();
      const auto& g = e.grad[static_cast<std::size_t>(j)];
      if (!g.is_zero()) d_action[j] += (g.eval(action) * rot).real();
    }
  }
}

Vector FourierPerturbation::grad_theta(const Vector& theta, const Vector& action) const {
  Vector dt, da;
  gradients(theta, action, dt, da);
  return dt;
}

Vector FourierPerturbation::grad_action(const Vector& theta, const Vector& action) const {
  Vector dt, da;
  gradients(theta, action, dt, da);
  return da;
}

double FourierPerturbation::derivative(const Vector& theta, const Vector& action, const MultiIndex& theta_order,
                                       const MultiIndex& action_order) const {
  check_args(theta, action);
  if (theta_order.size() != n_ || action_order.size() != n_)
    throw ValidationError("derivative order must have length " + std::to_string(n_));
  std::complex<double> sum = 0.0;
  for (const auto& [k, e] : modes_) {
    std::complex<double> factor = 1.0;
    for (std::size_t j = 0; j < n_; ++j)
      for (int r = 0; r < theta_order[j]; ++r) factor *= std::complex<double>(0.0, kTwoPi * k[j]);
    if (factor == 0.0) continue;
    const ComplexPolynomial dc = e.coeff.derivative(action_order);
    if (dc.is_zero()) continue;
    sum += factor * dc.eval(action) * std::polar(1.0, phase(k, theta));
  }
  return sum.real();
}

FourierPerturbation FourierPerturbation::filtered(const std::function<bool(const Mode&)>& keep) const {
  FourierPerturbation out(n_);
  for (const auto& [k, e] : modes_)
    if (keep(k)) out.modes_.emplace(k, e);
  return out;
}

FourierPerturbation FourierPerturbation::scaled(double factor) const {
  FourierPerturbation out(n_);
  if (factor == 0.0) return out;
  for (const auto& [k, e] : modes_) out.add_mode(k, e.coeff * std::complex<double>(factor));
  return out;
}

FourierPerturbation operator+(const FourierPerturbation& a, const FourierPerturbation& b) {
  if (a.n_ != b.n_) throw ValidationError("Fourier series dimension mismatch");
  FourierPerturbation out = a;
  for (const auto& [k, e] : b.modes_) out.add_mode(k, e.coeff);
  return out;
}

bool FourierPerturbation::operator==(const FourierPerturbation& other) const {
  if (n_ != other.n_ || modes_.size() != other.modes_.size()) return false;
  auto it = other.modes_.begin();
  for (const auto& [k, e] : modes_) {
    if (k != it->first || !(e.coeff == it->second.coeff)) return false;
    ++it;
  }
  return true;
}

}  // namespace microdrift
