#pragma once

#include "microdrift/drift.hpp"
#include "microdrift/hamiltonian.hpp"
#include "microdrift/lattice.hpp"

#include <optional>
#include <string>

namespace microdrift {

/// amplitude * cos(2 pi k.theta), stored as the pair +-k with amplitude / 2.
FourierPerturbation cosine_mode(std::size_t n, const Mode& k, double amplitude);

/// h(I) = |I|^2 / 2 (Euclidean).
RealPolynomial half_square(std::size_t n);

/// A worked example: system, resonance and, for the negative controls, the
/// constants of its resonant counterpart.
struct Preset {
  std::string name;
  NearIntegrableSystem system;
  ResonanceData resonance;
  std::optional<ControlReference> reference;
};

inline constexpr double kGoldenRatio = 1.6180339887498948482;

/// (2 pi)^{-3}, the amplitude that normalises cos(2 pi theta_1) in C^3.
double unit_amplitude();

/// n = 2, h = |I|^2/2, f = a cos(2 pi theta_1), I* = (0, 1).
Preset pendulum(double epsilon = 1e-4);
/// Pendulum plus a cos(2 pi (theta_1 + theta_2)).
Preset two_mode(double epsilon = 1e-4);
/// omega = I* = (1, golden), f = a cos(2 pi (theta_1 + theta_2)), no resonance.
Preset control_nonresonant(double epsilon = 1e-4);
/// omega = (0, 1), f = a cos(2 pi (theta_1 + theta_2)): f_omega* vanishes.
Preset control_constant_average(double epsilon = 1e-4);
/// omega = (0, 1), f = cos(2 pi (theta_1 + theta_2)).
Preset periodic_single_mode(double epsilon = 1e-4);
/// n = 3, I* = (0, 1, golden), f = a cos(2 pi theta_1) + a cos(2 pi (theta_1 + theta_2 - theta_3)).
Preset golden(double epsilon = 1e-4);

/// Looks a preset up by name; throws ValidationError for unknown names.
Preset preset_by_name(const std::string& name, double epsilon = 1e-4);
std::vector<std::string> preset_names();

}  // namespace microdrift
