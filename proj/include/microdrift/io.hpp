#pragma once

#include "microdrift/averaging.hpp"
#include "microdrift/drift.hpp"
#include "microdrift/hamiltonian.hpp"
#include "microdrift/integrator.hpp"
#include "microdrift/lattice.hpp"
#include "microdrift/normal_form.hpp"
#include "microdrift/small_divisors.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace microdrift {

using Json = nlohmann::json;

/// Parse errors are reported as ValidationError with "origin:line:column".
Json parse_json_text(const std::string& text, const std::string& origin);
/// IoError when the file cannot be read.
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// System file: n, domain_radius, h [{alpha, coeff}], f [{k, re, im,
/// coeff_poly [{alpha, re, im}]}], epsilon. Unknown keys are rejected and
/// every error names the offending path.
NearIntegrableSystem system_from_json(const Json& doc, const std::string& path = "system");
Json system_to_json(const NearIntegrableSystem& system);

/// Resonance file: i_star plus either exact `omega` (integers or strings
/// "p/q") or the adapted form `d` + `omega_tilde`. Optional `reference`
/// {lambda, hessian_bound, theta0} for the negative controls.
struct ResonanceInput {
  ResonanceData data;
  std::optional<ControlReference> reference;
};
ResonanceInput resonance_from_json(const NearIntegrableSystem& system, const Json& doc,
                                   const std::string& path = "resonance");

/// Everything a subcommand may need. Values given on the command line
/// override the file.
struct ExperimentConfig {
  Json system_doc;     // inline copy, null when absent
  Json resonance_doc;  // inline copy, null when absent
  std::optional<double> epsilon;
  std::vector<double> eps_list;
  double kappa = 1.0;
  double mu0 = 0.1;
  std::vector<double> transverse_phases;
  int phase_sweep = 0;
  double step = 0.0;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int qmax = 200;
  std::vector<double> omega_tilde;
  std::vector<double> theta0;
  std::vector<double> i0;
  double t_final = 0.0;
  double dt_out = 0.0;

  Json to_json() const;
};

/// Loads and validates a configuration. A persisted run.json is accepted
/// too (its config snapshot is used). Relative system/resonance paths are
/// resolved against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir,
                                  const std::string& path = "config");

/// "1e-2:1e-6:9" -> 9 log-spaced values.
std::vector<double> parse_eps_decades(const std::string& text);
/// "0.25,0" -> {0.25, 0}.
std::vector<double> parse_number_list(const std::string& text);

Json to_json(const DriftReport& report, bool with_series = true);
Json to_json(const SweepResult& result);
Json to_json(const EstimateVerification& verification);
Json to_json(const AveragedPerturbation& averaged);
Json to_json(const ScalingFit& fit);
Json to_json(const ResonanceData& resonance);
Json psi_table_json(const SmallDivisorProfile& profile);

/// Columns: Q, min_divisor, psi.
std::string psi_csv(const SmallDivisorProfile& profile);
/// Columns: eps, mu, tau, drift_total, drift_along, drift_transverse, threshold, pass.
std::string sweep_csv(const SweepResult& result);
/// Columns: eps, mu, sup_displacement, sup_dtheta, sup_dI, bound_*, ratio_*.
std::string normal_form_csv(const EstimateVerification& verification);
/// Columns: t, theta_1..n, I_1..n, energy (angles reduced to [0, 1)).
std::string trajectory_csv(const Trajectory& trajectory);
/// Columns: t, drift_along, drift_transverse, drift_total.
std::string drift_series_csv(const DriftReport& report);

/// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace microdrift
