#include "microdrift/averaging.hpp"
#include "microdrift/drift.hpp"
#include "microdrift/errors.hpp"
#include "microdrift/integrator.hpp"
#include "microdrift/io.hpp"
#include "microdrift/lattice.hpp"
#include "microdrift/normal_form.hpp"
#include "microdrift/record.hpp"
#include "microdrift/small_divisors.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace microdrift;

namespace {

struct Globals {
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

struct Inputs {
  std::string system;
  std::string resonance;
  std::string out;
};

struct Target {
  fs::path dir;
  std::string file;
};

/// A sub-command --out with an extension names the primary file; without
/// one it names the directory. The global --out only gives a directory.
Target resolve_out(const Globals& g, const std::string& local, const std::string& default_file) {
  Target t{g.out.empty() ? fs::path(".") : fs::path(g.out), default_file};
  if (local.empty()) return t;
  const fs::path p(local);
  if (p.has_extension()) {
    t.dir = p.has_parent_path() ? p.parent_path() : (g.out.empty() ? fs::path(".") : fs::path(g.out));
    t.file = p.filename().string();
  } else {
    t.dir = p;
  }
  return t;
}

ExperimentConfig base_config(const Globals& g, const Inputs& in) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (!in.system.empty()) {
    c.system_doc = read_json_file(in.system);
    system_from_json(c.system_doc, in.system);
  }
  if (!in.resonance.empty()) c.resonance_doc = read_json_file(in.resonance);
  if (g.threads > 0) c.threads = g.threads;
  if (g.seed) c.seed = *g.seed;
  return c;
}

NearIntegrableSystem need_system(const ExperimentConfig& c) {
  if (c.system_doc.is_null()) throw ValidationError("a system is required (--system or config key 'system')");
  NearIntegrableSystem s = system_from_json(c.system_doc);
  return c.epsilon ? s.with_epsilon(*c.epsilon) : s;
}

ResonanceInput need_resonance(const ExperimentConfig& c, const NearIntegrableSystem& s) {
  if (c.resonance_doc.is_null())
    throw ValidationError("a resonance is required (--resonance or config key 'resonance')");
  return resonance_from_json(s, c.resonance_doc);
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Vector omega_tilde_from(const ExperimentConfig& c, const std::string& flag) {
  if (!flag.empty()) return to_vector(parse_number_list(flag));
  if (!c.omega_tilde.empty()) return to_vector(c.omega_tilde);
  if (!c.resonance_doc.is_null() && !c.system_doc.is_null()) {
    const NearIntegrableSystem s = system_from_json(c.system_doc);
    return resonance_from_json(s, c.resonance_doc).data.omega_tilde;
  }
  return Vector::Ones(1);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunRecord make_record(const std::string& command, const ExperimentConfig& c) {
  RunRecord r;
  r.command = command;
  r.config = c.to_json();
  r.created_utc = utc_now();
  return r;
}

void finish(const RunRecord& record, const fs::path& dir, const std::vector<OutputFile>& files) {
  for (const auto& p : persist_run(record, dir, files)) std::cout << "wrote " << p.string() << '\n';
}

std::string fmt(double v) { return format_double(v); }

DriftConfig drift_config(const ExperimentConfig& c) {
  DriftConfig d;
  d.epsilon = c.epsilon.value_or(0.0);
  d.transverse_phases = to_vector(c.transverse_phases);
  d.kappa = c.kappa;
  d.mu0 = c.mu0;
  d.step = c.step;
  d.phase_sweep = c.phase_sweep;
  return d;
}

/// Picks the protocol that fits the inputs: the resonant micro-drift run, or one of the
/// two negative controls when its hypothesis fails.
DriftRunner drift_runner(const NearIntegrableSystem& system, const ResonanceInput& res,
                         const ExperimentConfig& cfg, bool keep_series, std::string& protocol) {
  auto base = drift_config(cfg);
  base.keep_series = keep_series;
  if (res.data.d == 0) {
    if (!res.reference) throw ValidationError("a non-resonant frequency needs resonance.reference constants");
    protocol = "control_nonresonant";
    return [&system, &res, base](double eps) {
      DriftConfig c = base;
      c.epsilon = eps;
      return negative_control_A1(system, res.data, *res.reference, c);
    };
  }
  auto avg = std::make_shared<AveragedPerturbation>(average(adapted_system(system, res.data), res.data.d));
  if (!avg->non_constant()) {
    if (!res.reference) throw AssumptionError("resonant average is constant and no reference constants are given");
    protocol = "control_constant_average";
    return [&system, &res, base, avg](double eps) {
      DriftConfig c = base;
      c.epsilon = eps;
      return negative_control_A2(system, res.data, *avg, *res.reference, c);
    };
  }
  protocol = "micro_drift";
  return [&system, &res, base, avg](double eps) {
    DriftConfig c = base;
    c.epsilon = eps;
    return micro_drift_run(system, res.data, *avg, c);
  };
}

// ---- sub-commands --------------------------------------------------------

int cmd_psi(const Globals& g, const Inputs& in, const std::string& omega, int qmax) {
  ExperimentConfig c = base_config(g, in);
  if (qmax > 0) c.qmax = qmax;
  const Vector wt = omega_tilde_from(c, omega);
  c.omega_tilde.assign(wt.data(), wt.data() + wt.size());
  Stopwatch sw;
  const SmallDivisorProfile profile(wt, c.qmax, c.kappa);
  RunRecord rec = make_record("psi", c);
  rec.reports["psi"] = psi_table_json(profile);
  rec.timings["compute_s"] = sw.seconds();
  std::cout << "Psi(" << c.qmax << ") = " << fmt(profile.psi(c.qmax)) << '\n';
  const Target t = resolve_out(g, in.out, "psi.csv");
  finish(rec, t.dir, {{t.file, psi_csv(profile)}});
  return 0;
}

int cmd_delta(const Globals& g, const Inputs& in, const std::string& omega, double x) {
  ExperimentConfig c = base_config(g, in);
  const Vector wt = omega_tilde_from(c, omega);
  c.omega_tilde.assign(wt.data(), wt.data() + wt.size());
  const SmallDivisorProfile profile = SmallDivisorProfile::covering(wt, c.kappa, x);
  const double value = profile.delta(x);
  std::cout << "Delta(" << fmt(x) << ") = " << fmt(value) << '\n';
  if (!in.out.empty() || !g.out.empty()) {
    RunRecord rec = make_record("delta", c);
    rec.reports["delta"] = {{"x", x}, {"delta", value}, {"qmax", profile.q_max()}};
    finish(rec, resolve_out(g, in.out, "run.json").dir, {});
  }
  return 0;
}

int cmd_mu(const Globals& g, const Inputs& in, const std::string& omega, double eps,
           std::optional<double> kappa) {
  ExperimentConfig c = base_config(g, in);
  if (kappa) c.kappa = *kappa;
  if (!(c.kappa > 0.0)) throw ValidationError("--kappa must be positive");
  if (!(eps > 0.0)) throw ValidationError("--eps must be positive");
  c.epsilon = eps;
  const Vector wt = omega_tilde_from(c, omega);
  c.omega_tilde.assign(wt.data(), wt.data() + wt.size());
  const double root = std::sqrt(eps);
  const SmallDivisorProfile profile = SmallDivisorProfile::covering(wt, c.kappa, c.kappa / root);
  const double mu = profile.mu(root);
  std::cout << "mu(sqrt eps) = " << fmt(mu) << "  (Delta(kappa/sqrt eps) = " << fmt(1.0 / mu) << ")\n";
  if (mu > c.mu0) std::cerr << "warning: mu exceeds mu0 = " << fmt(c.mu0) << '\n';
  if (!in.out.empty() || !g.out.empty()) {
    RunRecord rec = make_record("mu", c);
    rec.reports["mu"] = {{"epsilon", eps}, {"kappa", c.kappa}, {"mu", mu}, {"qmax", profile.q_max()}};
    finish(rec, resolve_out(g, in.out, "run.json").dir, {});
  }
  return 0;
}

int cmd_average(const Globals& g, const Inputs& in) {
  ExperimentConfig c = base_config(g, in);
  const NearIntegrableSystem sys = need_system(c);
  const ResonanceInput res = need_resonance(c, sys);
  if (res.data.d < 1) throw AssumptionError("frequency is not resonant (d = 0): nothing to average");
  Stopwatch sw;
  const AveragedPerturbation avg = average(adapted_system(sys, res.data), res.data.d);
  Json doc = to_json(avg);
  doc["resonance"] = to_json(res.data);
  std::cout << "lambda = " << fmt(avg.lambda) << "  L = " << fmt(avg.hessian_bound) << "  delta = " << fmt(avg.delta)
            << "  c = " << fmt(avg.c) << '\n';
  if (!avg.non_constant()) std::cerr << "warning: f_omega* is constant, the drift mechanism is absent\n";
  RunRecord rec = make_record("average", c);
  rec.reports["average"] = doc;
  rec.timings["compute_s"] = sw.seconds();
  const Target t = resolve_out(g, in.out, "avg.json");
  finish(rec, t.dir, {{t.file, doc.dump(2) + "\n"}});
  return 0;
}

int cmd_normal_form(const Globals& g, const Inputs& in, const std::string& eps_list, long samples,
                    std::optional<double> kappa) {
  ExperimentConfig c = base_config(g, in);
  if (!eps_list.empty()) c.eps_list = parse_number_list(eps_list);
  if (c.eps_list.empty()) throw ValidationError("--eps-list is required");
  if (samples > 0) c.samples = static_cast<std::size_t>(samples);
  if (kappa) c.kappa = *kappa;
  const NearIntegrableSystem sys = need_system(c);
  const ResonanceInput res = need_resonance(c, sys);
  EstimateOptions opt;
  opt.kappa = c.kappa;
  opt.sampling.samples = c.samples;
  opt.sampling.seed = c.seed;
  opt.sampling.threads = c.threads;
  Stopwatch sw;
  const EstimateVerification v = verify_estimates(sys, res.data, c.eps_list, opt);
  std::cout << "slopes: displacement " << fmt(v.displacement.fit.slope) << ", dtheta " << fmt(v.dtheta.fit.slope)
            << ", dI " << fmt(v.dI.fit.slope) << '\n';
  std::cout << "C: displacement " << fmt(v.displacement.constant) << ", dtheta " << fmt(v.dtheta.constant) << ", dI "
            << fmt(v.dI.constant) << '\n';
  RunRecord rec = make_record("normalform-check", c);
  rec.reports["normal_form"] = to_json(v);
  rec.timings["compute_s"] = sw.seconds();
  const Target t = resolve_out(g, in.out, "nf.csv");
  finish(rec, t.dir, {{t.file, normal_form_csv(v)}});
  return 0;
}

int cmd_integrate(const Globals& g, const Inputs& in, const std::string& theta0, const std::string& i0,
                  std::optional<double> t_final, std::optional<double> step, std::optional<double> dt_out,
                  std::optional<double> eps, bool reference) {
  ExperimentConfig c = base_config(g, in);
  if (!theta0.empty()) c.theta0 = parse_number_list(theta0);
  if (!i0.empty()) c.i0 = parse_number_list(i0);
  if (t_final) c.t_final = *t_final;
  if (step) c.step = *step;
  if (dt_out) c.dt_out = *dt_out;
  if (eps) c.epsilon = *eps;
  const NearIntegrableSystem sys = need_system(c);
  const std::size_t n = sys.n();
  if (c.theta0.size() != n || c.i0.size() != n)
    throw ValidationError("--theta0 and --i0 need " + std::to_string(n) + " comma-separated values");
  if (!(c.t_final > 0.0)) throw ValidationError("--T must be positive");
  const double h = c.step > 0.0 ? c.step : default_step(sys.epsilon(), 0.0);
  const double out_every = c.dt_out > 0.0 ? c.dt_out : c.t_final / 1000.0;
  const PhaseState s0 = PhaseState::at(to_vector(c.theta0), to_vector(c.i0));
  Stopwatch sw;
  const Trajectory traj = reference ? reference_integrate(sys, s0, c.t_final, 1e-12, out_every)
                                    : integrate(sys, s0, c.t_final, h, out_every);
  Json rep;
  rep["method"] = traj.method;
  rep["step_size"] = traj.step_size;
  rep["samples"] = traj.samples.size();
  rep["relative_energy_error"] = traj.max_relative_energy_error();
  Json fin = Json::array();
  for (Eigen::Index i = 0; i < traj.back().action.size(); ++i) fin.push_back(traj.back().action[i]);
  rep["final_action"] = fin;
  std::cout << traj.method << ": " << traj.samples.size() << " samples, relative energy error "
            << fmt(traj.max_relative_energy_error()) << '\n';
  RunRecord rec = make_record(reference ? "integrate --reference" : "integrate", c);
  rec.reports["trajectory"] = rep;
  rec.timings["compute_s"] = sw.seconds();
  const Target t = resolve_out(g, in.out, "traj.csv");
  finish(rec, t.dir, {{t.file, trajectory_csv(traj)}});
  return 0;
}

int cmd_drift(const Globals& g, const Inputs& in, std::optional<double> eps, std::optional<int> phase_sweep,
              const std::string& phases, std::optional<double> kappa, std::optional<double> mu0) {
  ExperimentConfig c = base_config(g, in);
  if (eps) c.epsilon = *eps;
  if (phase_sweep) c.phase_sweep = *phase_sweep;
  if (!phases.empty()) c.transverse_phases = parse_number_list(phases);
  if (kappa) c.kappa = *kappa;
  if (mu0) c.mu0 = *mu0;
  const NearIntegrableSystem sys = need_system(c);
  if (!c.epsilon) c.epsilon = sys.epsilon();
  if (!(*c.epsilon > 0.0)) throw ValidationError("--eps must be positive (or set epsilon in the system file)");
  const ResonanceInput res = need_resonance(c, sys);
  std::string protocol;
  Stopwatch sw;
  const DriftRunner run = drift_runner(sys, res, c, true, protocol);
  const DriftReport r = run(*c.epsilon);
  std::cout << protocol << ": |I(tau)-I(0)| = " << fmt(r.total) << ", threshold c sqrt(eps) = " << fmt(r.threshold)
            << ", " << (r.pass ? "above" : "below") << " threshold\n";
  std::cout << "along " << fmt(r.along) << ", transverse " << fmt(r.transverse) << ", max transverse "
            << fmt(r.max_transverse) << ", C = " << fmt(r.fitted_c) << '\n';
  if (r.mu_exceeded) std::cerr << "warning: mu = " << fmt(r.mu) << " exceeds mu0 = " << fmt(c.mu0) << '\n';
  Json doc = to_json(r);
  doc["protocol"] = protocol;
  RunRecord rec = make_record("drift", c);
  rec.reports["drift"] = doc;
  rec.timings["compute_s"] = sw.seconds();
  const Target t = resolve_out(g, in.out, "report.json");
  finish(rec, t.dir, {{t.file, doc.dump(2) + "\n"}, {"drift_series.csv", drift_series_csv(r)}});
  return 0;
}

int cmd_sweep(const Globals& g, const Inputs& in, const std::string& decades, const std::string& list) {
  ExperimentConfig c = base_config(g, in);
  if (!decades.empty() && !list.empty()) throw ValidationError("give --eps-decades or --eps-list, not both");
  if (!decades.empty()) c.eps_list = parse_eps_decades(decades);
  if (!list.empty()) c.eps_list = parse_number_list(list);
  if (c.eps_list.empty()) throw ValidationError("--eps-decades or --eps-list is required");
  for (double e : c.eps_list)
    if (!(e > 0.0)) throw ValidationError("sweep eps values must be positive");
  const NearIntegrableSystem sys = need_system(c);
  const ResonanceInput res = need_resonance(c, sys);
  std::string protocol;
  Stopwatch sw;
  const DriftRunner run = drift_runner(sys, res, c, false, protocol);
  const SweepResult result = sweep(c.eps_list, run, c.threads);
  std::cout << protocol << ": slope at tau " << fmt(result.total_fit.slope) << ", envelope slope "
            << fmt(result.envelope_fit.slope) << ", transverse slope " << fmt(result.transverse_fit.slope) << '\n';
  std::cout << (result.all_pass() ? "all runs above threshold" : "some runs below threshold") << '\n';
  Json doc = to_json(result);
  doc["protocol"] = protocol;
  RunRecord rec = make_record("sweep", c);
  rec.reports["sweep"] = doc;
  rec.timings["compute_s"] = sw.seconds();
  const Target t = resolve_out(g, in.out, "sweep.csv");
  finish(rec, t.dir, {{t.file, sweep_csv(result)}});
  return 0;
}

int cmd_plot(const Globals& g, const std::string& record_path, const std::string& out) {
  fs::path rec_path = record_path;
  if (rec_path.empty()) rec_path = (g.out.empty() ? fs::path(".") : fs::path(g.out)) / "run.json";
  const Json record = read_json_file(rec_path);
  RunRecord::from_json(record);
  fs::path dir = !out.empty() ? fs::path(out) : (!g.out.empty() ? fs::path(g.out) : rec_path.parent_path());
  if (dir.empty()) dir = ".";
  const PlotOutcome o = emit_plots(record, dir);
  for (const auto& n : o.notices) std::cout << "notice: " << n << '\n';
  for (const auto& f : o.files) std::cout << "wrote " << f.string() << '\n';
  if (o.files.empty()) std::cout << "notice: record has no plottable reports, nothing written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Micro-instability laboratory for near-integrable Hamiltonian systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kArtifactVersion));
  Globals g;
  app.add_option("--config", g.config, "Experiment configuration (JSON, or a previous run.json)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads for sweeps and sampling")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", g.seed, "Sample index offset for normal-form sampling");
  app.fallthrough();

  Inputs in;
  auto add_io = [&](CLI::App* sub, bool system, bool resonance) {
    if (system) sub->add_option("--system", in.system, "System definition (JSON)");
    if (resonance) sub->add_option("--resonance", in.resonance, "Resonance definition (JSON)");
    sub->add_option("--out", in.out, "Output file (with extension) or directory");
  };

  std::string omega;
  int qmax = 0;
  double x = 0.0, eps_value = 0.0;
  std::optional<double> kappa, mu0, eps, t_final, step, dt_out;
  std::optional<int> phase_sweep;
  std::string eps_list, decades, theta0, i0, phases, record;
  long samples = 0;
  bool reference = false;

  auto* psi = app.add_subcommand("psi", "Tabulate the small-divisor function Psi(Q)");
  add_io(psi, true, true);
  psi->add_option("--omega-tilde", omega, "Non-resonant block, comma separated");
  psi->add_option("--qmax", qmax, "Largest Q")->check(CLI::Range(1, 100000000));

  auto* delta = app.add_subcommand("delta", "Evaluate Delta(x)");
  add_io(delta, true, true);
  delta->add_option("--x", x, "Argument x >= Psi(1)")->required();
  delta->add_option("--omega-tilde", omega, "Non-resonant block (default 1)");

  auto* mu = app.add_subcommand("mu", "Evaluate mu(sqrt eps) = 1/Delta(kappa/sqrt eps)");
  add_io(mu, true, true);
  mu->add_option("--eps", eps_value, "eps > 0")->required();
  mu->add_option("--kappa", kappa, "kappa (default 1)");
  mu->add_option("--omega-tilde", omega, "Non-resonant block (default 1)");

  auto* avg = app.add_subcommand("average", "Resonant average, theta*, lambda, L, delta, c");
  add_io(avg, true, true);

  auto* nf = app.add_subcommand("normalform-check", "Sample the first-order normal form remainder");
  add_io(nf, true, true);
  nf->add_option("--eps-list", eps_list, "Comma separated eps values");
  nf->add_option("--samples", samples, "Sample points per eps")->check(CLI::Range(1L, 100000000L));
  nf->add_option("--kappa", kappa, "kappa (default 1)");

  auto* integ = app.add_subcommand("integrate", "Integrate one trajectory with the implicit midpoint rule");
  add_io(integ, true, false);
  integ->add_option("--theta0", theta0, "Initial angles (turns), comma separated");
  integ->add_option("--i0", i0, "Initial actions, comma separated");
  integ->add_option("--T", t_final, "Final time");
  integ->add_option("--step", step, "Step size");
  integ->add_option("--dt-out", dt_out, "Output stride");
  integ->add_option("--eps", eps, "Override eps of the system file");
  integ->add_flag("--reference", reference, "Use the adaptive Runge-Kutta-Fehlberg 7(8) comparator");

  auto* drift = app.add_subcommand("drift", "One micro-drift run (or negative control)");
  add_io(drift, true, true);
  drift->add_option("--eps", eps, "eps > 0");
  drift->add_option("--phase-sweep", phase_sweep, "Average over m transverse phases")->check(CLI::Range(0, 4096));
  drift->add_option("--phases", phases, "Initial transverse angles, comma separated");
  drift->add_option("--kappa", kappa, "kappa (default 1)");
  drift->add_option("--mu0", mu0, "mu0 (default 0.1)");

  auto* sw = app.add_subcommand("sweep", "Drift runs over a list of eps with scaling fits");
  add_io(sw, true, true);
  sw->add_option("--eps-decades", decades, "from:to:count, log spaced");
  sw->add_option("--eps-list", eps_list, "Comma separated eps values");

  auto* plot = app.add_subcommand("plot", "SVG plots from a run record");
  plot->add_option("--run", record, "run.json to plot (default <out>/run.json)");
  plot->add_option("--out", in.out, "Directory for the SVG files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*psi) return cmd_psi(g, in, omega, qmax);
    if (*delta) return cmd_delta(g, in, omega, x);
    if (*mu) return cmd_mu(g, in, omega, eps_value, kappa);
    if (*avg) return cmd_average(g, in);
    if (*nf) return cmd_normal_form(g, in, eps_list, samples, kappa);
    if (*integ) return cmd_integrate(g, in, theta0, i0, t_final, step, dt_out, eps, reference);
    if (*drift) return cmd_drift(g, in, eps, phase_sweep, phases, kappa, mu0);
    if (*sw) return cmd_sweep(g, in, decades, eps_list);
    if (*plot) return cmd_plot(g, record, in.out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed record: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
