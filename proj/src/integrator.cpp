#include "microdrift/integrator.hpp"

#include "microdrift/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>

namespace microdrift {

namespace {

void reduce_in_place(PhaseState& s) {
  for (Eigen::Index i = 0; i < s.theta.size(); ++i) {
    const double w = std::floor(s.theta[i]);
    s.theta[i] -= w;
    s.winding[i] += w;
    if (s.theta[i] >= 1.0) {
      s.theta[i] -= 1.0;
      s.winding[i] += 1.0;
    }
  }
}

bool try_midpoint(const HamiltonianFlow& flow, const PhaseState& s, double h, const MidpointOptions& opt,
                  PhaseState& out) {
  const Eigen::Index n = s.theta.size();
  Vector dtheta(n), daction(n);
  flow.vector_field(s.theta, s.action, dtheta, daction);
  Vector theta_new = s.theta + h * dtheta;
  Vector action_new = s.action + h * daction;
  for (int it = 0; it < opt.max_iterations; ++it) {
    flow.vector_field(0.5 * (s.theta + theta_new), 0.5 * (s.action + action_new), dtheta, daction);
    const Vector theta_next = s.theta + h * dtheta;
    const Vector action_next = s.action + h * daction;
    const double change = std::max(sup_norm(theta_next - theta_new), sup_norm(action_next - action_new));
    theta_new = theta_next;
    action_new = action_next;
    if (!std::isfinite(change)) return false;
    if (change <= opt.tolerance) {
      out.theta = theta_new;
      out.action = action_new;
      out.winding = s.winding;
      out.t = s.t + h;
      reduce_in_place(out);
      return true;
    }
  }
  return false;
}

PhaseState midpoint_recursive(const HamiltonianFlow& flow, const PhaseState& s, double h, const MidpointOptions& opt,
                              int depth) {
  PhaseState out;
  if (try_midpoint(flow, s, h, opt, out)) return out;
  if (depth >= opt.max_halvings)
    throw NonConvergenceError("implicit midpoint did not converge after " + std::to_string(opt.max_halvings) +
                              " step halvings (t = " + std::to_string(s.t) + ")");
  const PhaseState half = midpoint_recursive(flow, s, 0.5 * h, opt, depth + 1);
  return midpoint_recursive(flow, half, 0.5 * h, opt, depth + 1);
}

using OdeState = std::vector<double>;

struct OdeSystem {
  const HamiltonianFlow* flow;
  std::size_t n;
  void operator()(const OdeState& z, OdeState& dz, double) const {
    Vector theta(static_cast<Eigen::Index>(n)), action(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      theta[static_cast<Eigen::Index>(i)] = z[i];
      action[static_cast<Eigen::Index>(i)] = z[n + i];
    }
    Vector dt, da;
    flow->vector_field(theta, action, dt, da);
    for (std::size_t i = 0; i < n; ++i) {
      dz[i] = dt[static_cast<Eigen::Index>(i)];
      dz[n + i] = da[static_cast<Eigen::Index>(i)];
    }
  }
};

}  // namespace

PhaseState PhaseState::at(Vector theta, Vector action, double t) {
  if (theta.size() != action.size()) throw ValidationError("angle and action vectors differ in length");
  PhaseState s;
  s.theta = std::move(theta);
  s.action = std::move(action);
  s.t = t;
  s.winding = Vector::Zero(s.theta.size());
  reduce_in_place(s);
  return s;
}

double Trajectory::max_relative_energy_error() const {
  if (energy.empty()) return 0.0;
  const double e0 = energy.front();
  const double scale = e0 == 0.0 ? 1.0 : std::abs(e0);
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - e0) / scale);
  return worst;
}

PhaseState midpoint_step(const HamiltonianFlow& flow, const PhaseState& state, double h,
                         const MidpointOptions& options) {
  if (h == 0.0 || !std::isfinite(h)) throw ValidationError("midpoint step must be finite and non-zero");
  if (static_cast<std::size_t>(state.theta.size()) != flow.dimension())
    throw ValidationError("state dimension does not match the Hamiltonian");
  return midpoint_recursive(flow, state, h, options, 0);
}

Trajectory integrate(const HamiltonianFlow& flow, const PhaseState& state0, double t_final, double h_step,
                     double dt_out, const StepObserver& every_step, const MidpointOptions& options) {
  if (!(t_final > 0.0)) throw ValidationError("integration time T must be positive");
  if (!(h_step > 0.0)) throw ValidationError("step size must be positive");
  const auto steps = static_cast<long long>(std::ceil(t_final / h_step - 1e-9));
  const double h = t_final / static_cast<double>(steps);
  long long stride = 0;
  if (dt_out > 0.0) stride = std::max<long long>(1, std::llround(dt_out / h));

  Trajectory traj;
  traj.step_size = h;
  traj.method = "implicit-midpoint";
  PhaseState s = state0;
  if (s.winding.size() != s.theta.size()) s.winding = Vector::Zero(s.theta.size());
  const double t0 = s.t;
  traj.samples.push_back(s);
  traj.energy.push_back(flow.energy(s.theta, s.action));
  if (every_step) every_step(s);
  for (long long i = 1; i <= steps; ++i) {
    s = midpoint_step(flow, s, h, options);
    s.t = t0 + static_cast<double>(i) * h;
    if (every_step) every_step(s);
    if (i == steps || (stride > 0 && i % stride == 0)) {
      traj.samples.push_back(s);
      traj.energy.push_back(flow.energy(s.theta, s.action));
    }
  }
  return traj;
}

Trajectory reference_integrate(const HamiltonianFlow& flow, const PhaseState& state0, double t_final, double tol,
                               double dt_out) {
  namespace ode = boost::numeric::odeint;
  if (t_final == 0.0 || !std::isfinite(t_final)) throw ValidationError("reference integration needs T != 0");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  const std::size_t n = flow.dimension();
  OdeState z(2 * n);
  const Vector start = state0.theta + (state0.winding.size() ? state0.winding : Vector::Zero(state0.theta.size()));
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = start[static_cast<Eigen::Index>(i)];
    z[n + i] = state0.action[static_cast<Eigen::Index>(i)];
  }
  Trajectory traj;
  traj.method = "rkf78-adaptive";
  auto observe = [&](const OdeState& x, double t) {
    Vector theta(static_cast<Eigen::Index>(n)), action(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      theta[static_cast<Eigen::Index>(i)] = x[i];
      action[static_cast<Eigen::Index>(i)] = x[n + i];
    }
    PhaseState s = PhaseState::at(theta, action, t);
    traj.energy.push_back(flow.energy(s.theta, s.action));
    traj.samples.push_back(std::move(s));
  };
  auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<OdeState>());
  const OdeSystem sys{&flow, n};
  const double t0 = state0.t;
  const double t1 = t0 + t_final;
  std::vector<double> times{t0};
  if (dt_out > 0.0) {
    const auto count = static_cast<long long>(std::floor(std::abs(t_final) / dt_out + 1e-9));
    const double dir = t_final > 0 ? 1.0 : -1.0;
    for (long long i = 1; i <= count; ++i) {
      const double t = t0 + dir * static_cast<double>(i) * dt_out;
      if (std::abs(t - t1) > 1e-12 * std::max(1.0, std::abs(t1))) times.push_back(t);
    }
  }
  times.push_back(t1);
  const double dt0 = (t_final > 0 ? 1.0 : -1.0) * std::min(1e-3, std::abs(t_final));
  ode::integrate_times(stepper, sys, z, times.begin(), times.end(), dt0, observe);
  traj.step_size = 0.0;
  return traj;
}

double default_step(double epsilon, double lambda) {
  double h = 1e-2 / kTwoPi;
  if (epsilon > 0.0 && lambda > 0.0) h = std::min(h, 1.0 / std::sqrt(epsilon * lambda) / 1000.0);
  return h;
}

}  // namespace microdrift
