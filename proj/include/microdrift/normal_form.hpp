#pragma once

#include "microdrift/averaging.hpp"
#include "microdrift/fit.hpp"
#include "microdrift/fourier.hpp"
#include "microdrift/hamiltonian.hpp"
#include "microdrift/integrator.hpp"
#include "microdrift/lattice.hpp"
#include "microdrift/small_divisors.hpp"

#include <cstdint>
#include <vector>

namespace microdrift {

/// Generating function chi of the first-order averaging transformation.
/// Modes of chi are the non-resonant modes of f with |k| <= q.
struct GeneratorField {
  FourierPerturbation chi;
  int q = 0;
  double divisor_floor = 0.0;  // smallest |k.w| used; +inf when chi = 0
};

/// chi_k(I) = f_k(I) / (i 2 pi k.w) with the constant frequency w = grad h(0)
/// of the adapted, I*-centred system. Requires q >= K_f and q <= profile
/// Q_max; divisors below the hidden-resonance floor are rejected.
GeneratorField build_generator(const NearIntegrableSystem& adapted, const ResonanceData& resonance, int q,
                               const SmallDivisorProfile& profile);

/// H = eps * chi as a flow for the integrator.
class GeneratorFlow final : public HamiltonianFlow {
 public:
  GeneratorFlow(const FourierPerturbation& chi, double epsilon) : chi_(chi), epsilon_(epsilon) {}
  std::size_t dimension() const override { return chi_.dim(); }
  double energy(const Vector& theta, const Vector& action) const override;
  void vector_field(const Vector& theta, const Vector& action, Vector& theta_dot, Vector& action_dot) const override;

 private:
  const FourierPerturbation& chi_;
  double epsilon_;
};

/// Phi = time-1 map of the Hamiltonian eps chi, realised with fixed
/// implicit-midpoint steps (default 1e-3).
class NormalFormTransform {
 public:
  NormalFormTransform(GeneratorField generator, double epsilon, double flow_step = 1e-3);

  const GeneratorField& generator() const { return generator_; }
  double epsilon() const { return epsilon_; }

  /// No domain checks; used for sampling.
  PhaseState map(const PhaseState& state) const;
  PhaseState inverse_map(const PhaseState& state) const;

  /// Checks |I| <= 2 sqrt(eps) on input and |I'| <= 3 sqrt(eps) on output.
  PhaseState apply(const PhaseState& state) const;
  PhaseState inverse(const PhaseState& state) const;

 private:
  PhaseState flow_for(const PhaseState& state, double direction) const;

  GeneratorField generator_;
  double epsilon_;
  double flow_step_;
};

PhaseState apply_transform(const GeneratorField& generator, double epsilon, const PhaseState& state);
PhaseState inverse_transform(const GeneratorField& generator, double epsilon, const PhaseState& state);

/// Sampled sup norms of the conjugation remainder on T^n x B_{2 sqrt eps}.
struct RemainderReport {
  double epsilon = 0.0;
  double mu = 0.0;
  double sup_displacement = 0.0;  // |Pi_I Phi - Id|
  double sup_dtheta = 0.0;        // |d_theta f~|
  double sup_dI = 0.0;            // |d_I f~|
  std::size_t sample_count = 0;
};

struct SamplingOptions {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// f~ = H o Phi - h - eps f_omega evaluated pointwise on a Halton sample;
/// derivatives by central differences with step sqrt(eps) * 1e-3.
RemainderReport remainder_report(const NearIntegrableSystem& adapted, const FourierPerturbation& f_omega,
                                 const GeneratorField& generator, double epsilon, double mu,
                                 const SamplingOptions& options = {});

struct EstimateRow {
  RemainderReport report;
  double bound_displacement = 0.0;  // sqrt(eps) mu
  double bound_dtheta = 0.0;        // eps mu
  double bound_dI = 0.0;            // sqrt(eps) mu
  double ratio_displacement = 0.0;
  double ratio_dtheta = 0.0;
  double ratio_dI = 0.0;
};

struct EstimateSummary {
  ScalingFit fit;
  double constant = 0.0;   // smallest C with sup <= C * bound on every row
  double stability = 0.0;  // max ratio / min ratio
};

struct EstimateVerification {
  std::vector<EstimateRow> rows;
  EstimateSummary displacement;
  EstimateSummary dtheta;
  EstimateSummary dI;
  int q = 0;
  double kappa = 1.0;
};

struct EstimateOptions {
  double kappa = 1.0;
  SamplingOptions sampling;
};

EstimateVerification verify_estimates(const NearIntegrableSystem& system, const ResonanceData& resonance,
                                         const std::vector<double>& eps_list, const EstimateOptions& options = {});

}  // namespace microdrift
