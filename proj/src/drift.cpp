#include "microdrift/drift.hpp"

#include "microdrift/errors.hpp"
#include "microdrift/integrator.hpp"
#include "microdrift/small_divisors.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace microdrift {

namespace {

struct ProtocolInput {
  Vector theta0_adapted;
  double tau = 0.0;
  double c = 0.0;
  double lambda = 0.0;  // only used for the default step
};

double effective_mu(const ResonanceData& resonance, double epsilon, double kappa) {
  if (resonance.omega_tilde.size() == 0) return 0.0;
  const double root = std::sqrt(epsilon);
  const SmallDivisorProfile profile = SmallDivisorProfile::covering(resonance.omega_tilde, kappa, kappa / root);
  return profile.mu(root);
}

Vector transverse_phases(const ResonanceData& resonance, const DriftConfig& config) {
  const auto m = static_cast<Eigen::Index>(resonance.n()) - resonance.d;
  if (config.transverse_phases.size() == 0) return Vector::Zero(m);
  if (config.transverse_phases.size() != m)
    throw ValidationError("expected " + std::to_string(m) + " transverse phases, got " +
                          std::to_string(config.transverse_phases.size()));
  return config.transverse_phases;
}

DriftReport run_once(const NearIntegrableSystem& system, const ResonanceData& resonance, const ProtocolInput& in,
                     const DriftConfig& config) {
  const double eps = config.epsilon;
  if (!(eps > 0.0)) throw ValidationError("drift runs need eps > 0");
  if (!(config.kappa > 0.0)) throw ValidationError("kappa must be positive");
  const NearIntegrableSystem sys = system.with_epsilon(eps);
  const auto n = static_cast<Eigen::Index>(sys.n());
  const Eigen::Index d = resonance.d;
  const Matrix to_adapted = to_real(resonance.adaptation_inverse).transpose();

  DriftReport r;
  r.epsilon = eps;
  r.tau = in.tau;
  r.c = in.c;
  r.threshold = in.c * std::sqrt(eps);
  r.mu = effective_mu(resonance, eps, config.kappa);
  r.mu_exceeded = r.mu > config.mu0;
  r.initial_theta = resonance.from_adapted_angles(in.theta0_adapted);

  const Vector i0 = resonance.i_star;
  const PhaseState s0 = PhaseState::at(r.initial_theta, i0);
  const double e0 = sys.energy(s0.theta, s0.action);
  const double e_scale = e0 == 0.0 ? 1.0 : std::abs(e0);

  auto decompose = [&](const Vector& action, double& along, double& trans) {
    const Vector a = to_adapted * (action - i0);
    along = d > 0 ? a.head(d).cwiseAbs().maxCoeff() : 0.0;
    trans = d < n ? a.tail(n - d).cwiseAbs().maxCoeff() : 0.0;
    return a;
  };

  const double h = config.step > 0.0 ? config.step : default_step(eps, in.lambda);
  const double dt_out = config.dt_out > 0.0 ? config.dt_out : in.tau / 200.0;
  auto observer = [&](const PhaseState& s) {
    double along = 0.0, trans = 0.0;
    decompose(s.action, along, trans);
    r.max_transverse = std::max(r.max_transverse, trans);
    r.max_total = std::max(r.max_total, std::max(along, trans));
    r.energy_error = std::max(r.energy_error, std::abs(sys.energy(s.theta, s.action) - e0) / e_scale);
  };
  const Trajectory traj = integrate(sys, s0, in.tau, h, config.keep_series ? dt_out : 0.0, observer);
  r.step_size = traj.step_size;

  r.drift_vector = traj.back().action - i0;
  r.drift_adapted = decompose(traj.back().action, r.along, r.transverse);
  r.total = r.drift_adapted.cwiseAbs().maxCoeff();
  r.pass = r.total >= r.threshold;
  if (r.mu > 0.0) r.fitted_c = r.max_transverse / (std::sqrt(eps) * r.mu);
  if (config.keep_series) {
    for (const auto& s : traj.samples) {
      DriftSample p;
      p.t = s.t;
      const Vector a = decompose(s.action, p.along, p.transverse);
      p.total = a.cwiseAbs().maxCoeff();
      r.series.push_back(p);
    }
  }
  return r;
}

/// Averages over `phase_sweep` diagonal offsets j/m of the transverse angles.
DriftReport run_protocol(const NearIntegrableSystem& system, const ResonanceData& resonance, ProtocolInput in,
                         const DriftConfig& config) {
  if (config.phase_sweep <= 1) return run_once(system, resonance, in, config);
  const int m = config.phase_sweep;
  const auto n = static_cast<Eigen::Index>(resonance.n());
  const Eigen::Index d = resonance.d;
  const Vector base = in.theta0_adapted;
  DriftReport mean;
  for (int j = 0; j < m; ++j) {
    in.theta0_adapted = base;
    for (Eigen::Index i = d; i < n; ++i) in.theta0_adapted[i] += static_cast<double>(j) / m;
    DriftConfig one = config;
    one.keep_series = config.keep_series && j == 0;
    DriftReport r = run_once(system, resonance, in, one);
    if (j == 0) {
      mean = r;
      continue;
    }
    mean.drift_vector += r.drift_vector;
    mean.drift_adapted += r.drift_adapted;
    mean.total += r.total;
    mean.along += r.along;
    mean.transverse += r.transverse;
    mean.max_transverse = std::max(mean.max_transverse, r.max_transverse);
    mean.max_total = std::max(mean.max_total, r.max_total);
    mean.fitted_c = std::max(mean.fitted_c, r.fitted_c);
    mean.energy_error = std::max(mean.energy_error, r.energy_error);
  }
  const double inv = 1.0 / m;
  mean.drift_vector *= inv;
  mean.drift_adapted *= inv;
  mean.total *= inv;
  mean.along *= inv;
  mean.transverse *= inv;
  mean.phases = m;
  mean.pass = mean.total >= mean.threshold;
  return mean;
}

}  // namespace

bool SweepResult::all_pass() const {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return !reports.empty();
}

DriftReport micro_drift_run(const NearIntegrableSystem& system, const ResonanceData& resonance,
                            const AveragedPerturbation& averaged, const DriftConfig& config) {
  if (resonance.d < 1) throw AssumptionError("frequency is not resonant: the drift protocol needs d >= 1");
  if (!averaged.non_constant()) throw AssumptionError("resonant average is constant (lambda = 0)");
  ProtocolInput in;
  const Vector phases = transverse_phases(resonance, config);
  in.theta0_adapted.resize(static_cast<Eigen::Index>(resonance.n()));
  in.theta0_adapted << averaged.theta_star, phases;
  in.tau = averaged.tau(config.epsilon);
  in.c = averaged.c;
  in.lambda = averaged.lambda;
  return run_protocol(system, resonance, in, config);
}

namespace {

ProtocolInput control_input(const ResonanceData& resonance, const ControlReference& reference,
                            const DriftConfig& config) {
  if (static_cast<std::size_t>(reference.theta0.size()) != resonance.n())
    throw ValidationError("control reference theta0 must have length n");
  const ProofConstants pc = derive_constants(reference.lambda, reference.hessian_bound, config.epsilon);
  ProtocolInput in;
  in.theta0_adapted = reference.theta0;
  if (config.transverse_phases.size() > 0)
    in.theta0_adapted.tail(config.transverse_phases.size()) = transverse_phases(resonance, config);
  in.tau = pc.tau;
  in.c = pc.c;
  in.lambda = reference.lambda;
  return in;
}

}  // namespace

DriftReport negative_control_A1(const NearIntegrableSystem& system, const ResonanceData& resonance,
                                const ControlReference& reference, const DriftConfig& config) {
  if (resonance.d != 0) throw ValidationError("the non-resonant control needs a non-resonant frequency (d = 0)");
  return run_protocol(system, resonance, control_input(resonance, reference, config), config);
}

DriftReport negative_control_A2(const NearIntegrableSystem& system, const ResonanceData& resonance,
                                const AveragedPerturbation& averaged, const ControlReference& reference,
                                const DriftConfig& config) {
  if (resonance.d < 1) throw ValidationError("the constant-average control needs a resonant frequency");
  if (averaged.non_constant()) throw ValidationError("the constant-average control needs a constant resonant average");
  return run_protocol(system, resonance, control_input(resonance, reference, config), config);
}

SweepResult summarize_sweep(std::vector<DriftReport> reports) {
  SweepResult out;
  out.reports = std::move(reports);
  std::vector<double> eps, total, envelope, trans;
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : out.reports) {
    eps.push_back(r.epsilon);
    total.push_back(r.total);
    envelope.push_back(r.max_total);
    trans.push_back(r.max_transverse);
    if (r.fitted_c > 0.0) {
      lo = std::min(lo, r.fitted_c);
      out.c_max = std::max(out.c_max, r.fitted_c);
    }
  }
  out.total_fit = loglog_fit(eps, total);
  out.envelope_fit = loglog_fit(eps, envelope);
  out.transverse_fit = loglog_fit(eps, trans);
  out.c_stability = out.c_max > 0.0 ? out.c_max / lo : 0.0;
  return out;
}

SweepResult sweep(const std::vector<double>& eps_list, const DriftRunner& run, unsigned threads) {
  std::vector<DriftReport> reports(eps_list.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(eps_list.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < eps_list.size(); ++i) reports[i] = run(eps_list[i]);
    return summarize_sweep(std::move(reports));
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < eps_list.size(); i = next++) {
        try {
          reports[i] = run(eps_list[i]);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return summarize_sweep(std::move(reports));
}

SweepResult epsilon_sweep(const NearIntegrableSystem& system, const ResonanceData& resonance,
                          const AveragedPerturbation& averaged, const std::vector<double>& eps_list,
                          const DriftConfig& base, unsigned threads) {
  return sweep(
      eps_list,
      [&](double eps) {
        DriftConfig c = base;
        c.epsilon = eps;
        return micro_drift_run(system, resonance, averaged, c);
      },
      threads);
}

}  // namespace microdrift
