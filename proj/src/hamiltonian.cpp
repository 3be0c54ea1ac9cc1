#include "microdrift/hamiltonian.hpp"

#include "microdrift/errors.hpp"

#include <cmath>
#include <complex>
#include <functional>

namespace microdrift {

namespace {

void check_length(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n)
    throw ValidationError(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(n));
}

// All multi-indices over `vars` variables with total order <= max_order.
std::vector<MultiIndex> orders_up_to(std::size_t vars, int max_order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(vars, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos == vars) {
      out.push_back(cur);
      return;
    }
    for (int a = 0; a <= left; ++a) {
      cur[pos] = a;
      rec(pos + 1, left - a);
    }
    cur[pos] = 0;
  };
  rec(0, max_order);
  return out;
}

int total(const MultiIndex& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

// Visits every point of an m^dims grid; coords[i] = lo[i] + idx * step[i].
template <typename F>
void for_each_grid_point(std::size_t dims, int m, const Vector& lo, const Vector& step, F&& visit) {
  std::vector<int> idx(dims, 0);
  Vector x(static_cast<Eigen::Index>(dims));
  while (true) {
    for (std::size_t i = 0; i < dims; ++i)
      x[static_cast<Eigen::Index>(i)] = lo[static_cast<Eigen::Index>(i)] + idx[i] * step[static_cast<Eigen::Index>(i)];
    visit(x);
    std::size_t d = 0;
    while (d < dims && ++idx[d] == m) idx[d++] = 0;
    if (d == dims) break;
  }
}

}  // namespace

NearIntegrableSystem::NearIntegrableSystem(RealPolynomial h, FourierPerturbation f, double epsilon,
                                           double domain_radius)
    : h_(std::move(h)), f_(std::move(f)), epsilon_(epsilon), radius_(domain_radius) {
  if (h_.dim() < 2) throw ValidationError("n >= 2 is required, got n = " + std::to_string(h_.dim()));
  if (f_.dim() != h_.dim()) throw ValidationError("h and f have different dimensions");
  if (!(epsilon_ >= 0.0) || !std::isfinite(epsilon_)) throw ValidationError("epsilon must be finite and >= 0");
  if (!(radius_ > 0.0)) throw ValidationError("domain_radius must be positive");
  f_.check_reality();
  grad_h_.reserve(h_.dim());
  for (std::size_t j = 0; j < h_.dim(); ++j) grad_h_.push_back(h_.derivative(j));
}

NearIntegrableSystem NearIntegrableSystem::with_epsilon(double epsilon) const {
  return NearIntegrableSystem(h_, f_, epsilon, radius_);
}

NearIntegrableSystem NearIntegrableSystem::with_perturbation(FourierPerturbation f) const {
  return NearIntegrableSystem(h_, std::move(f), epsilon_, radius_);
}

Vector NearIntegrableSystem::frequency(const Vector& action) const {
  check_length(action, n(), "action vector");
  Vector w(static_cast<Eigen::Index>(n()));
  for (std::size_t j = 0; j < n(); ++j) w[static_cast<Eigen::Index>(j)] = grad_h_[j].eval(action);
  return w;
}

double NearIntegrableSystem::energy(const Vector& theta, const Vector& action) const {
  const double base = h_.eval(action);
  return epsilon_ == 0.0 ? base : base + epsilon_ * f_.eval(theta, action);
}

void NearIntegrableSystem::vector_field(const Vector& theta, const Vector& action, Vector& theta_dot,
                                        Vector& action_dot) const {
  theta_dot = frequency(action);
  if (epsilon_ == 0.0 || f_.empty()) {
    action_dot.setZero(static_cast<Eigen::Index>(n()));
    return;
  }
  Vector dft, dfa;
  f_.gradients(theta, action, dft, dfa);
  theta_dot += epsilon_ * dfa;
  action_dot = -epsilon_ * dft;
}

double eval_h(const RealPolynomial& h, const Vector& action) { return h.eval(action); }

Vector grad_h(const RealPolynomial& h, const Vector& action) {
  check_length(action, h.dim(), "action vector");
  Vector g(static_cast<Eigen::Index>(h.dim()));
  for (std::size_t j = 0; j < h.dim(); ++j) g[static_cast<Eigen::Index>(j)] = h.derivative(j).eval(action);
  return g;
}

Matrix hess_h(const RealPolynomial& h, const Vector& action) {
  check_length(action, h.dim(), "action vector");
  const auto n = static_cast<Eigen::Index>(h.dim());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RealPolynomial di = h.derivative(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = di.derivative(static_cast<std::size_t>(j)).eval(action);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

double eval_f(const FourierPerturbation& f, const Vector& theta, const Vector& action) {
  return f.eval(theta, action);
}

Vector grad_theta_f(const FourierPerturbation& f, const Vector& theta, const Vector& action) {
  return f.grad_theta(theta, action);
}

Vector grad_I_f(const FourierPerturbation& f, const Vector& theta, const Vector& action) {
  return f.grad_action(theta, action);
}

SupNormEstimates sup_norm_estimates(const NearIntegrableSystem& system, int m) {
  if (m < 8) throw ValidationError("sup-norm grid needs at least 8 points per dimension");
  const std::size_t n = system.n();
  const double r = system.domain_radius();
  SupNormEstimates out;
  out.grid_per_dimension = m;

  Vector lo_I = Vector::Constant(static_cast<Eigen::Index>(n), -r);
  Vector step_I = Vector::Constant(static_cast<Eigen::Index>(n), 2.0 * r / (m - 1));

  std::vector<RealPolynomial> h_derivs;
  for (const auto& a : orders_up_to(n, 2)) h_derivs.push_back(system.h().derivative(a));
  for_each_grid_point(n, m, lo_I, step_I, [&](const Vector& I) {
    for (const auto& p : h_derivs) out.h_c2 = std::max(out.h_c2, std::abs(p.eval(I)));
  });

  // For each action order gamma (|gamma| <= 3) and each mode, the derivative
  // of the coefficient; angle derivatives multiply by (i 2 pi k)^beta.
  struct ModeDerivs {
    Mode k;
    std::vector<ComplexPolynomial> by_gamma;
  };
  const auto gammas = orders_up_to(n, 3);
  const auto betas = orders_up_to(n, 3);
  std::vector<ModeDerivs> table;
  for (const auto& [k, c] : system.f().coefficients()) {
    ModeDerivs md{k, {}};
    for (const auto& g : gammas) md.by_gamma.push_back(c.derivative(g));
    table.push_back(std::move(md));
  }
  if (table.empty()) return out;

  Vector lo(static_cast<Eigen::Index>(2 * n));
  Vector step(static_cast<Eigen::Index>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    lo[static_cast<Eigen::Index>(i)] = 0.0;
    step[static_cast<Eigen::Index>(i)] = 1.0 / m;
    lo[static_cast<Eigen::Index>(n + i)] = -r;
    step[static_cast<Eigen::Index>(n + i)] = 2.0 * r / (m - 1);
  }
  std::vector<std::complex<double>> acc(gammas.size() * betas.size());
  for_each_grid_point(2 * n, m, lo, step, [&](const Vector& x) {
    const Vector theta = x.head(static_cast<Eigen::Index>(n));
    const Vector I = x.tail(static_cast<Eigen::Index>(n));
    std::fill(acc.begin(), acc.end(), std::complex<double>(0.0));
    for (const auto& md : table) {
      double ph = 0.0;
      for (std::size_t j = 0; j < n; ++j) ph += md.k[j] * theta[static_cast<Eigen::Index>(j)];
      const std::complex<double> rot = std::polar(1.0, kTwoPi * ph);
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        if (md.by_gamma[gi].is_zero()) continue;
        const std::complex<double> cv = md.by_gamma[gi].eval(I) * rot;
        const int budget = 3 - total(gammas[gi]);
        for (std::size_t bi = 0; bi < betas.size(); ++bi) {
          if (total(betas[bi]) > budget) continue;
          std::complex<double> factor = 1.0;
          for (std::size_t j = 0; j < n; ++j)
            for (int p = 0; p < betas[bi][j]; ++p) factor *= std::complex<double>(0.0, kTwoPi * md.k[j]);
          acc[gi * betas.size() + bi] += factor * cv;
        }
      }
    }
    for (const auto& v : acc) out.f_c3 = std::max(out.f_c3, std::abs(v.real()));
  });
  return out;
}

Vector reduce_angles(const Vector& theta) {
  Vector r(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double v = theta[i] - std::floor(theta[i]);
    if (v >= 1.0) v = 0.0;
    r[i] = v;
  }
  return r;
}

}  // namespace microdrift
