#include "microdrift/io.hpp"

#include "microdrift/errors.hpp"
#include "microdrift/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace microdrift {

namespace fs = std::filesystem;

namespace {

// ---- schema helpers ------------------------------------------------------

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
    if (!ok) throw ValidationError(path + "." + item.key() + ": unknown key");
  }
}

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + "." + key + ": required key is missing");
  return j.at(key);
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path + ": expected a finite number");
  return v;
}

long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return j.get<long long>();
}

double number_or(const Json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j.at(key), path + "." + key) : fallback;
}

std::vector<int> int_array(const Json& j, const std::string& path, std::size_t n) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array of integers");
  if (j.size() != n)
    throw ValidationError(path + ": expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const long long v = integer(j[i], path + "[" + std::to_string(i) + "]");
    if (v < -1000000 || v > 1000000) throw ValidationError(path + "[" + std::to_string(i) + "]: out of range");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> number_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Vector sized_vector(const Json& j, const std::string& path, std::size_t n) {
  const auto v = number_array(j, path);
  if (v.size() != n)
    throw ValidationError(path + ": expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  return to_vector(v);
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const IntMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

// ---- csv -----------------------------------------------------------------

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  CsvWriter& cell(double v) { return raw(format_double(v)); }
  CsvWriter& cell(long long v) { return raw(std::to_string(v)); }
  CsvWriter& raw(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---- json files ----------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return ss.str();
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }
}

Json read_json_file(const fs::path& path) { return parse_json_text(read_text_file(path), path.string()); }

// ---- system --------------------------------------------------------------

NearIntegrableSystem system_from_json(const Json& doc, const std::string& path) {
  check_keys(doc, path, {"n", "domain_radius", "h", "f", "epsilon"});
  const long long n_raw = integer(require(doc, "n", path), path + ".n");
  if (n_raw < 2) throw ValidationError(path + ".n: n >= 2 is required (got " + std::to_string(n_raw) + ")");
  if (n_raw > 16) throw ValidationError(path + ".n: at most 16 degrees of freedom are supported");
  const auto n = static_cast<std::size_t>(n_raw);
  const double radius = number_or(doc, "domain_radius", path, 1.0);
  if (!(radius > 0.0)) throw ValidationError(path + ".domain_radius: must be positive");
  const double eps = number_or(doc, "epsilon", path, 0.0);
  if (eps < 0.0) throw ValidationError(path + ".epsilon: must be >= 0");

  RealPolynomial h(n);
  const Json& hj = require(doc, "h", path);
  if (!hj.is_array()) throw ValidationError(path + ".h: expected an array of monomials");
  for (std::size_t i = 0; i < hj.size(); ++i) {
    const std::string p = path + ".h[" + std::to_string(i) + "]";
    check_keys(hj[i], p, {"alpha", "coeff"});
    const auto alpha = int_array(require(hj[i], "alpha", p), p + ".alpha", n);
    for (std::size_t a = 0; a < n; ++a)
      if (alpha[a] < 0) throw ValidationError(p + ".alpha[" + std::to_string(a) + "]: exponents must be >= 0");
    h.add_term(alpha, number(require(hj[i], "coeff", p), p + ".coeff"));
  }

  FourierPerturbation f(n);
  if (doc.contains("f")) {
    const Json& fj = doc.at("f");
    if (!fj.is_array()) throw ValidationError(path + ".f: expected an array of modes");
    for (std::size_t i = 0; i < fj.size(); ++i) {
      const std::string p = path + ".f[" + std::to_string(i) + "]";
      check_keys(fj[i], p, {"k", "re", "im", "coeff_poly"});
      const Mode k = int_array(require(fj[i], "k", p), p + ".k", n);
      ComplexPolynomial c = ComplexPolynomial::constant(
          n, {number_or(fj[i], "re", p, 0.0), number_or(fj[i], "im", p, 0.0)});
      if (fj[i].contains("coeff_poly")) {
        const Json& cp = fj[i].at("coeff_poly");
        if (!cp.is_array()) throw ValidationError(p + ".coeff_poly: expected an array of monomials");
        for (std::size_t t = 0; t < cp.size(); ++t) {
          const std::string q = p + ".coeff_poly[" + std::to_string(t) + "]";
          check_keys(cp[t], q, {"alpha", "re", "im"});
          const auto alpha = int_array(require(cp[t], "alpha", q), q + ".alpha", n);
          for (std::size_t a = 0; a < n; ++a)
            if (alpha[a] < 0) throw ValidationError(q + ".alpha[" + std::to_string(a) + "]: exponents must be >= 0");
          c.add_term(alpha, {number_or(cp[t], "re", q, 0.0), number_or(cp[t], "im", q, 0.0)});
        }
      }
      f.add_mode(k, c);
    }
  }
  try {
    return NearIntegrableSystem(std::move(h), std::move(f), eps, radius);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

Json system_to_json(const NearIntegrableSystem& system) {
  Json doc;
  doc["n"] = system.n();
  doc["domain_radius"] = system.domain_radius();
  doc["epsilon"] = system.epsilon();
  Json h = Json::array();
  for (const auto& [alpha, c] : system.h().terms()) h.push_back({{"alpha", alpha}, {"coeff", c}});
  doc["h"] = h;
  Json f = Json::array();
  const MultiIndex zero(system.n(), 0);
  for (const auto& [k, c] : system.f().coefficients()) {
    Json mode;
    mode["k"] = k;
    Json poly = Json::array();
    for (const auto& [alpha, v] : c.terms()) {
      if (alpha == zero) {
        mode["re"] = v.real();
        mode["im"] = v.imag();
      } else {
        poly.push_back({{"alpha", alpha}, {"re", v.real()}, {"im", v.imag()}});
      }
    }
    if (!poly.empty()) mode["coeff_poly"] = poly;
    f.push_back(mode);
  }
  doc["f"] = f;
  return doc;
}

// ---- resonance -----------------------------------------------------------

ResonanceInput resonance_from_json(const NearIntegrableSystem& system, const Json& doc, const std::string& path) {
  check_keys(doc, path, {"i_star", "omega", "d", "omega_tilde", "allow_nonresonant", "reference"});
  const std::size_t n = system.n();
  const Vector i_star = sized_vector(require(doc, "i_star", path), path + ".i_star", n);
  const bool exact = doc.contains("omega");
  const bool adapted = doc.contains("d") || doc.contains("omega_tilde");
  if (exact == adapted)
    throw ValidationError(path + ": give either 'omega' (exact rationals) or 'd' with 'omega_tilde'");

  ResonanceInput out;
  try {
    if (exact) {
      const Json& wj = doc.at("omega");
      if (!wj.is_array() || wj.size() != n)
        throw ValidationError(path + ".omega: expected " + std::to_string(n) + " rational entries");
      std::vector<Rational> omega;
      for (std::size_t i = 0; i < n; ++i) {
        const std::string p = path + ".omega[" + std::to_string(i) + "]";
        if (wj[i].is_number_integer()) {
          omega.emplace_back(wj[i].get<std::int64_t>());
        } else if (wj[i].is_string()) {
          try {
            omega.push_back(Rational::parse(wj[i].get<std::string>()));
          } catch (const ValidationError& e) {
            throw ValidationError(p + ": " + e.what());
          }
        } else {
          throw ValidationError(p + ": expected an integer or a rational string such as \"3/2\"");
        }
      }
      if (doc.contains("allow_nonresonant"))
        throw ValidationError(path + ".allow_nonresonant: only meaningful with the adapted form");
      out.data = resonance_from_rational(system, i_star, omega);
    } else {
      const long long d = integer(require(doc, "d", path), path + ".d");
      if (d < 0 || d >= static_cast<long long>(n))
        throw ValidationError(path + ".d: must lie in [0, n-1] (d = 0 only for non-resonant controls)");
      const Vector wt = sized_vector(require(doc, "omega_tilde", path), path + ".omega_tilde",
                                     n - static_cast<std::size_t>(d));
      bool allow = false;
      if (doc.contains("allow_nonresonant")) {
        if (!doc.at("allow_nonresonant").is_boolean())
          throw ValidationError(path + ".allow_nonresonant: expected a boolean");
        allow = doc.at("allow_nonresonant").get<bool>();
      }
      out.data = resonance_from_adapted(system, i_star, static_cast<int>(d), wt, allow);
    }
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ValidationError(path + ": " + msg);
  }

  if (doc.contains("reference")) {
    const Json& r = doc.at("reference");
    const std::string p = path + ".reference";
    check_keys(r, p, {"lambda", "hessian_bound", "theta0"});
    ControlReference ref;
    ref.lambda = number(require(r, "lambda", p), p + ".lambda");
    ref.hessian_bound = number(require(r, "hessian_bound", p), p + ".hessian_bound");
    if (!(ref.lambda > 0.0) || !(ref.hessian_bound > 0.0))
      throw ValidationError(p + ": lambda and hessian_bound must be positive");
    ref.theta0 = sized_vector(require(r, "theta0", p), p + ".theta0", n);
    out.reference = ref;
  }
  return out;
}

// ---- config --------------------------------------------------------------

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ValidationError("empty entry in number list '" + text + "'");
    item = item.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0' || !std::isfinite(v))
      throw ValidationError("'" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty number list");
  return out;
}

std::vector<double> parse_eps_decades(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ValidationError("eps decades must look like from:to:count, got '" + text + "'");
  const double from = parse_number_list(parts[0]).at(0);
  const double to = parse_number_list(parts[1]).at(0);
  char* end = nullptr;
  const long count = std::strtol(parts[2].c_str(), &end, 10);
  if (*end != '\0' || count < 2) throw ValidationError("eps decades: count must be an integer >= 2");
  if (!(from > 0.0) || !(to > 0.0)) throw ValidationError("eps decades: bounds must be positive");
  return log_spaced(from, to, static_cast<std::size_t>(count));
}

ExperimentConfig config_from_json(const Json& doc, const fs::path& base_dir, const std::string& path) {
  if (doc.is_object() && doc.contains("artifact") && doc.contains("config"))
    return config_from_json(doc.at("config"), base_dir, path + ".config");
  check_keys(doc, path,
             {"system", "resonance", "epsilon", "eps_list", "eps_decades", "kappa", "mu0", "transverse_phases",
              "phase_sweep", "step", "samples", "seed", "threads", "qmax", "omega_tilde", "theta0", "i0", "T",
              "dt_out"});
  ExperimentConfig c;
  auto document = [&](const char* key) -> Json {
    if (!doc.contains(key)) return nullptr;
    const Json& v = doc.at(key);
    if (v.is_string()) {
      const fs::path p = base_dir / v.get<std::string>();
      return read_json_file(p);
    }
    if (v.is_object()) return v;
    throw ValidationError(path + "." + key + ": expected a file name or an inline object");
  };
  c.system_doc = document("system");
  c.resonance_doc = document("resonance");
  if (!c.system_doc.is_null()) {
    const NearIntegrableSystem sys = system_from_json(c.system_doc, path + ".system");
    if (!c.resonance_doc.is_null()) resonance_from_json(sys, c.resonance_doc, path + ".resonance");
  } else if (!c.resonance_doc.is_null()) {
    throw ValidationError(path + ".resonance: a resonance needs a system");
  }
  if (doc.contains("epsilon")) {
    c.epsilon = number(doc.at("epsilon"), path + ".epsilon");
    if (*c.epsilon < 0.0) throw ValidationError(path + ".epsilon: must be >= 0");
  }
  if (doc.contains("eps_list") && doc.contains("eps_decades"))
    throw ValidationError(path + ": give eps_list or eps_decades, not both");
  if (doc.contains("eps_list")) c.eps_list = number_array(doc.at("eps_list"), path + ".eps_list");
  if (doc.contains("eps_decades")) {
    if (!doc.at("eps_decades").is_string())
      throw ValidationError(path + ".eps_decades: expected a string such as \"1e-2:1e-6:9\"");
    c.eps_list = parse_eps_decades(doc.at("eps_decades").get<std::string>());
  }
  for (double e : c.eps_list)
    if (!(e >= 0.0)) throw ValidationError(path + ".eps_list: values must be >= 0");
  c.kappa = number_or(doc, "kappa", path, 1.0);
  if (!(c.kappa > 0.0)) throw ValidationError(path + ".kappa: must be positive");
  c.mu0 = number_or(doc, "mu0", path, 0.1);
  if (!(c.mu0 > 0.0)) throw ValidationError(path + ".mu0: must be positive");
  if (doc.contains("transverse_phases"))
    c.transverse_phases = number_array(doc.at("transverse_phases"), path + ".transverse_phases");
  if (doc.contains("phase_sweep")) {
    const long long m = integer(doc.at("phase_sweep"), path + ".phase_sweep");
    if (m < 0 || m > 4096) throw ValidationError(path + ".phase_sweep: must lie in [0, 4096]");
    c.phase_sweep = static_cast<int>(m);
  }
  c.step = number_or(doc, "step", path, 0.0);
  if (c.step < 0.0) throw ValidationError(path + ".step: must be >= 0 (0 selects the default)");
  if (doc.contains("samples")) {
    const long long s = integer(doc.at("samples"), path + ".samples");
    if (s < 1) throw ValidationError(path + ".samples: must be >= 1");
    c.samples = static_cast<std::size_t>(s);
  }
  if (doc.contains("seed")) {
    const Json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ValidationError(path + ".seed: expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("threads")) {
    const long long t = integer(doc.at("threads"), path + ".threads");
    if (t < 1 || t > 1024) throw ValidationError(path + ".threads: must lie in [1, 1024]");
    c.threads = static_cast<unsigned>(t);
  }
  if (doc.contains("qmax")) {
    const long long q = integer(doc.at("qmax"), path + ".qmax");
    if (q < 1 || q > 100000000) throw ValidationError(path + ".qmax: must lie in [1, 1e8]");
    c.qmax = static_cast<int>(q);
  }
  if (doc.contains("omega_tilde")) c.omega_tilde = number_array(doc.at("omega_tilde"), path + ".omega_tilde");
  if (doc.contains("theta0")) c.theta0 = number_array(doc.at("theta0"), path + ".theta0");
  if (doc.contains("i0")) c.i0 = number_array(doc.at("i0"), path + ".i0");
  c.t_final = number_or(doc, "T", path, 0.0);
  c.dt_out = number_or(doc, "dt_out", path, 0.0);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return config_from_json(read_json_file(path), path.parent_path(), "config");
}

Json ExperimentConfig::to_json() const {
  Json j;
  if (!system_doc.is_null()) j["system"] = system_doc;
  if (!resonance_doc.is_null()) j["resonance"] = resonance_doc;
  if (epsilon) j["epsilon"] = *epsilon;
  if (!eps_list.empty()) j["eps_list"] = eps_list;
  j["kappa"] = kappa;
  j["mu0"] = mu0;
  if (!transverse_phases.empty()) j["transverse_phases"] = transverse_phases;
  j["phase_sweep"] = phase_sweep;
  j["step"] = step;
  j["samples"] = samples;
  j["seed"] = seed;
  j["threads"] = threads;
  j["qmax"] = qmax;
  if (!omega_tilde.empty()) j["omega_tilde"] = omega_tilde;
  if (!theta0.empty()) j["theta0"] = theta0;
  if (!i0.empty()) j["i0"] = i0;
  if (t_final > 0.0) j["T"] = t_final;
  if (dt_out > 0.0) j["dt_out"] = dt_out;
  return j;
}

// ---- reports -------------------------------------------------------------

Json to_json(const ScalingFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}, {"points", fit.points}};
}

Json to_json(const ResonanceData& r) {
  return {{"i_star", vector_json(r.i_star)},
          {"omega", vector_json(r.omega)},
          {"d", r.d},
          {"lambda_basis", matrix_json(r.lambda_basis)},
          {"A", matrix_json(r.adaptation)},
          {"omega_tilde", vector_json(r.omega_tilde)}};
}

Json to_json(const DriftReport& r, bool with_series) {
  Json j;
  j["epsilon"] = r.epsilon;
  j["mu"] = r.mu;
  j["tau"] = r.tau;
  j["c"] = r.c;
  j["threshold"] = r.threshold;
  j["initial_theta"] = vector_json(r.initial_theta);
  j["drift_vector"] = vector_json(r.drift_vector);
  j["drift_adapted"] = vector_json(r.drift_adapted);
  j["drift_total"] = r.total;
  j["drift_along"] = r.along;
  j["drift_transverse"] = r.transverse;
  j["max_transverse"] = r.max_transverse;
  j["max_total"] = r.max_total;
  j["fitted_C"] = r.fitted_c;
  j["energy_error"] = r.energy_error;
  j["step_size"] = r.step_size;
  j["pass"] = r.pass;
  j["mu_exceeded"] = r.mu_exceeded;
  j["phases"] = r.phases;
  if (with_series && !r.series.empty()) {
    Json s = Json::array();
    for (const auto& p : r.series) s.push_back({p.t, p.along, p.transverse, p.total});
    j["series"] = {{"columns", {"t", "drift_along", "drift_transverse", "drift_total"}}, {"rows", s}};
  }
  return j;
}

Json to_json(const SweepResult& result) {
  Json j;
  Json rows = Json::array();
  for (const auto& r : result.reports) rows.push_back(to_json(r, false));
  j["rows"] = rows;
  j["total_fit"] = to_json(result.total_fit);
  j["envelope_fit"] = to_json(result.envelope_fit);
  j["transverse_fit"] = to_json(result.transverse_fit);
  j["C_max"] = result.c_max;
  j["C_stability"] = result.c_stability;
  j["all_pass"] = result.all_pass();
  return j;
}

Json to_json(const EstimateVerification& v) {
  Json j;
  Json rows = Json::array();
  for (const auto& r : v.rows) {
    rows.push_back({{"epsilon", r.report.epsilon},
                    {"mu", r.report.mu},
                    {"samples", r.report.sample_count},
                    {"sup_displacement", r.report.sup_displacement},
                    {"sup_dtheta", r.report.sup_dtheta},
                    {"sup_dI", r.report.sup_dI},
                    {"bound_displacement", r.bound_displacement},
                    {"bound_dtheta", r.bound_dtheta},
                    {"bound_dI", r.bound_dI},
                    {"ratio_displacement", r.ratio_displacement},
                    {"ratio_dtheta", r.ratio_dtheta},
                    {"ratio_dI", r.ratio_dI}});
  }
  j["rows"] = rows;
  auto summary = [](const EstimateSummary& s) {
    return Json{{"fit", to_json(s.fit)}, {"C", s.constant}, {"stability", s.stability}};
  };
  j["displacement"] = summary(v.displacement);
  j["dtheta"] = summary(v.dtheta);
  j["dI"] = summary(v.dI);
  j["Q"] = v.q;
  j["kappa"] = v.kappa;
  return j;
}

Json to_json(const AveragedPerturbation& a) {
  Json j;
  j["d"] = a.d;
  Json modes = Json::array();
  for (const auto& [k, c] : a.f_omega.coefficients()) {
    Json poly = Json::array();
    for (const auto& [alpha, v] : c.terms()) poly.push_back({{"alpha", alpha}, {"re", v.real()}, {"im", v.imag()}});
    modes.push_back({{"k", k}, {"coeff_poly", poly}});
  }
  j["f_omega"] = modes;
  Json star = Json::array();
  for (const auto& [k, c] : a.f_omega_star.modes()) star.push_back({{"k", k}, {"re", c.real()}, {"im", c.imag()}});
  j["f_omega_star"] = star;
  j["theta_star"] = vector_json(a.theta_star);
  j["lambda"] = a.lambda;
  j["L"] = a.hessian_bound;
  j["delta"] = a.delta;
  j["c"] = a.c;
  j["non_constant"] = a.non_constant();
  return j;
}

Json psi_table_json(const SmallDivisorProfile& profile) {
  Json rows = Json::array();
  for (int q = 1; q <= profile.q_max(); ++q) rows.push_back({q, profile.min_divisor(q), profile.psi(q)});
  return {{"omega_tilde", vector_json(profile.omega_tilde())},
          {"qmax", profile.q_max()},
          {"columns", {"Q", "min_divisor", "psi"}},
          {"rows", rows}};
}

std::string psi_csv(const SmallDivisorProfile& profile) {
  CsvWriter w({"Q", "min_divisor", "psi"});
  for (int q = 1; q <= profile.q_max(); ++q) {
    w.cell(static_cast<long long>(q)).cell(profile.min_divisor(q)).cell(profile.psi(q));
    w.end_row();
  }
  return w.str();
}

std::string sweep_csv(const SweepResult& result) {
  CsvWriter w({"eps", "mu", "tau", "drift_total", "drift_along", "drift_transverse", "threshold", "pass"});
  for (const auto& r : result.reports) {
    w.cell(r.epsilon).cell(r.mu).cell(r.tau).cell(r.total).cell(r.along).cell(r.transverse).cell(r.threshold);
    w.raw(r.pass ? "true" : "false");
    w.end_row();
  }
  return w.str();
}

std::string normal_form_csv(const EstimateVerification& v) {
  CsvWriter w({"eps", "mu", "sup_displacement", "sup_dtheta", "sup_dI", "bound_displacement", "bound_dtheta",
               "bound_dI", "ratio_displacement", "ratio_dtheta", "ratio_dI"});
  for (const auto& r : v.rows) {
    w.cell(r.report.epsilon).cell(r.report.mu).cell(r.report.sup_displacement).cell(r.report.sup_dtheta);
    w.cell(r.report.sup_dI).cell(r.bound_displacement).cell(r.bound_dtheta).cell(r.bound_dI);
    w.cell(r.ratio_displacement).cell(r.ratio_dtheta).cell(r.ratio_dI);
    w.end_row();
  }
  return w.str();
}

std::string trajectory_csv(const Trajectory& trajectory) {
  const std::size_t n = trajectory.samples.empty() ? 0 : static_cast<std::size_t>(trajectory.samples[0].theta.size());
  std::vector<std::string> header{"t"};
  for (std::size_t i = 1; i <= n; ++i) header.push_back("theta_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) header.push_back("I_" + std::to_string(i));
  header.push_back("energy");
  CsvWriter w(header);
  for (std::size_t s = 0; s < trajectory.samples.size(); ++s) {
    const auto& p = trajectory.samples[s];
    w.cell(p.t);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) w.cell(p.theta[i]);
    for (Eigen::Index i = 0; i < p.action.size(); ++i) w.cell(p.action[i]);
    w.cell(trajectory.energy[s]);
    w.end_row();
  }
  return w.str();
}

std::string drift_series_csv(const DriftReport& report) {
  CsvWriter w({"t", "drift_along", "drift_transverse", "drift_total"});
  for (const auto& p : report.series) {
    w.cell(p.t).cell(p.along).cell(p.transverse).cell(p.total);
    w.end_row();
  }
  return w.str();
}

}  // namespace microdrift
