#pragma once

#include "microdrift/averaging.hpp"
#include "microdrift/fit.hpp"
#include "microdrift/hamiltonian.hpp"
#include "microdrift/lattice.hpp"

#include <functional>
#include <vector>

namespace microdrift {

struct DriftConfig {
  double epsilon = 0.0;
  Vector transverse_phases;  // theta_{d+1..n}(0) in adapted coordinates; empty means zeros
  double kappa = 1.0;
  double mu0 = 0.1;
  double step = 0.0;    // <= 0 selects default_step
  double dt_out = 0.0;  // series stride; <= 0 gives about 200 samples
  int phase_sweep = 0;  // > 1 averages over that many transverse phase offsets
  bool keep_series = false;
};

/// One point of the drift decomposition time series (adapted coordinates).
struct DriftSample {
  double t = 0.0;
  double along = 0.0;
  double transverse = 0.0;
  double total = 0.0;
};

struct DriftReport {
  double epsilon = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  double c = 0.0;
  double threshold = 0.0;  // c sqrt(eps)
  Vector initial_theta;    // user coordinates
  Vector drift_vector;     // I(tau) - I(0), user coordinates
  Vector drift_adapted;    // A^{-T} (I(tau) - I(0))
  double total = 0.0;      // |drift_adapted|
  double along = 0.0;      // max over the first d adapted components
  double transverse = 0.0; // max over the last n - d
  double max_transverse = 0.0;  // over [0, tau]
  double max_total = 0.0;       // over [0, tau]
  double fitted_c = 0.0;        // max_transverse / (sqrt(eps) mu)
  double energy_error = 0.0;    // max relative energy error over every step
  double step_size = 0.0;
  bool pass = false;
  bool mu_exceeded = false;
  int phases = 1;
  std::vector<DriftSample> series;
};

struct SweepResult {
  std::vector<DriftReport> reports;
  ScalingFit total_fit;       // drift at tau
  ScalingFit envelope_fit;    // max over [0, tau]
  ScalingFit transverse_fit;  // max transverse over [0, tau]
  double c_max = 0.0;
  double c_stability = 0.0;   // max / min fitted C
  bool all_pass() const;
};

/// Constants borrowed from the resonant counterpart when the system under
/// test has no usable f_omega* (negative controls).
struct ControlReference {
  double lambda = 0.0;
  double hessian_bound = 0.0;
  Vector theta0;  // full initial angle in adapted coordinates
};

/// Integrates the full system from I(0) = I*, theta(0) = (theta*, phases)
/// (adapted) up to tau and decomposes the drift along and across Lambda.
DriftReport micro_drift_run(const NearIntegrableSystem& system, const ResonanceData& resonance,
                            const AveragedPerturbation& averaged, const DriftConfig& config);

/// Same protocol for a non-resonant frequency: resonance.d must be 0.
DriftReport negative_control_A1(const NearIntegrableSystem& system, const ResonanceData& resonance,
                                const ControlReference& reference, const DriftConfig& config);

/// Same protocol for a resonance whose average f_omega* is constant.
DriftReport negative_control_A2(const NearIntegrableSystem& system, const ResonanceData& resonance,
                                const AveragedPerturbation& averaged, const ControlReference& reference,
                                const DriftConfig& config);

using DriftRunner = std::function<DriftReport(double epsilon)>;

/// Runs `run` for every eps (concurrently when threads > 1), keeps the
/// reports in eps-list order and fits the scaling exponents.
SweepResult sweep(const std::vector<double>& eps_list, const DriftRunner& run, unsigned threads = 1);

SweepResult epsilon_sweep(const NearIntegrableSystem& system, const ResonanceData& resonance,
                          const AveragedPerturbation& averaged, const std::vector<double>& eps_list,
                          const DriftConfig& base, unsigned threads = 1);

/// Fits and the fitted-C diagnostics for an existing list of reports.
SweepResult summarize_sweep(std::vector<DriftReport> reports);

}  // namespace microdrift
