#pragma once

#include "microdrift/hamiltonian.hpp"
#include "microdrift/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace microdrift {

/// Point of T^n x R^n at time t. Angles are kept in [0, 1); the integer part
/// removed by each reduction accumulates in `winding`.
struct PhaseState {
  Vector theta;
  Vector action;
  double t = 0.0;
  Eigen::VectorXd winding;  // integer-valued

  static PhaseState at(Vector theta, Vector action, double t = 0.0);
  Vector unwrapped_theta() const { return theta + winding; }
};

struct Trajectory {
  std::vector<PhaseState> samples;
  std::vector<double> energy;
  double step_size = 0.0;
  std::string method;

  /// max_i |E_i - E_0| / |E_0| (absolute when E_0 = 0).
  double max_relative_energy_error() const;
  const PhaseState& back() const { return samples.back(); }
};

struct MidpointOptions {
  double tolerance = 1e-13;
  int max_iterations = 50;
  int max_halvings = 8;
};

/// One implicit-midpoint step of signed size h. Falls back to two half steps
/// (recursively, up to max_halvings levels) when the fixed-point iteration
/// does not converge.
PhaseState midpoint_step(const HamiltonianFlow& flow, const PhaseState& state, double h,
                         const MidpointOptions& options = {});

using StepObserver = std::function<void(const PhaseState&)>;

/// Fixed-step implicit midpoint from state0.t to state0.t + T. The step is
/// shrunk to T / ceil(T / h_step) so the run ends exactly at T. Samples are
/// stored every dt_out (dt_out <= 0 keeps only the end points); the observer,
/// if any, sees every step.
Trajectory integrate(const HamiltonianFlow& flow, const PhaseState& state0, double t_final, double h_step,
                     double dt_out, const StepObserver& every_step = {}, const MidpointOptions& options = {});

/// Adaptive Runge-Kutta-Fehlberg 7(8) with absolute and relative tolerance
/// `tol`. Not symplectic; used only as a comparator. T may be negative.
Trajectory reference_integrate(const HamiltonianFlow& flow, const PhaseState& state0, double t_final,
                               double tol = 1e-12, double dt_out = 0.0);

/// min((2 pi)^{-1} 1e-2, P / 1000) where P = 1/sqrt(eps lambda) is the slow
/// pendulum period (ignored when eps or lambda vanish).
double default_step(double epsilon, double lambda);

}  // namespace microdrift
