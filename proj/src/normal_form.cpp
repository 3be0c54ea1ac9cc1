#include "microdrift/normal_form.hpp"

#include "microdrift/errors.hpp"
#include "microdrift/sampling.hpp"

#include <cmath>
#include <limits>
#include <thread>

namespace microdrift {

namespace {

EstimateSummary summarize(const std::vector<double>& eps, const std::vector<double>& sups,
                          const std::vector<double>& ratios) {
  EstimateSummary s;
  s.fit = loglog_fit(eps, sups);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) continue;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  s.constant = hi;
  s.stability = hi > 0.0 ? hi / lo : 0.0;
  return s;
}

}  // namespace

GeneratorField build_generator(const NearIntegrableSystem& adapted, const ResonanceData& resonance, int q,
                               const SmallDivisorProfile& profile) {
  const auto n = static_cast<Eigen::Index>(adapted.n());
  const int k_f = adapted.f().max_order();
  if (q < std::max(1, k_f))
    throw ValidationError("generator truncation Q = " + std::to_string(q) + " is below K_f = " + std::to_string(k_f));
  const Vector omega = adapted.frequency(Vector::Zero(n));
  const int d = resonance.d;
  GeneratorField g;
  g.q = q;
  g.chi = FourierPerturbation(adapted.n());
  g.divisor_floor = std::numeric_limits<double>::infinity();
  for (const auto& [k, c] : adapted.f().coefficients()) {
    bool resonant = true;
    for (std::size_t i = static_cast<std::size_t>(d); i < k.size(); ++i) resonant = resonant && k[i] == 0;
    if (resonant || sup_norm(k) > q) continue;
    double kw = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) kw += k[static_cast<std::size_t>(i)] * omega[i];
    if (std::abs(kw) < kHiddenResonanceFloor)
      throw HiddenResonanceError("hidden resonance: divisor |k.w| below 1e-14 for a non-resonant mode");
    g.divisor_floor = std::min(g.divisor_floor, std::abs(kw));
    g.chi.add_mode(k, c * (1.0 / std::complex<double>(0.0, kTwoPi * kw)));
  }
  if (!g.chi.empty() && q <= profile.q_max() && g.divisor_floor * profile.psi(q) < 1.0 - 1e-9)
    throw NumericError("generator divisor below 1/Psi(Q): profile and system frequencies disagree");
  return g;
}

double GeneratorFlow::energy(const Vector& theta, const Vector& action) const {
  return epsilon_ * chi_.eval(theta, action);
}

void GeneratorFlow::vector_field(const Vector& theta, const Vector& action, Vector& theta_dot,
                                 Vector& action_dot) const {
  Vector dt, da;
  chi_.gradients(theta, action, dt, da);
  theta_dot = epsilon_ * da;
  action_dot = -epsilon_ * dt;
}

NormalFormTransform::NormalFormTransform(GeneratorField generator, double epsilon, double flow_step)
    : generator_(std::move(generator)), epsilon_(epsilon), flow_step_(flow_step) {
  if (!(epsilon_ >= 0.0)) throw ValidationError("eps must be >= 0");
  if (!(flow_step_ > 0.0 && flow_step_ <= 1.0)) throw ValidationError("flow step must lie in (0, 1]");
}

PhaseState NormalFormTransform::flow_for(const PhaseState& state, double direction) const {
  if (epsilon_ == 0.0 || generator_.chi.empty()) return state;
  const GeneratorFlow flow(generator_.chi, epsilon_);
  const auto steps = static_cast<long long>(std::llround(1.0 / flow_step_));
  const double h = direction / static_cast<double>(steps);
  PhaseState s = state;
  if (s.winding.size() != s.theta.size()) s.winding = Vector::Zero(s.theta.size());
  for (long long i = 0; i < steps; ++i) s = midpoint_step(flow, s, h);
  s.t = state.t;
  return s;
}

PhaseState NormalFormTransform::map(const PhaseState& state) const { return flow_for(state, 1.0); }
PhaseState NormalFormTransform::inverse_map(const PhaseState& state) const { return flow_for(state, -1.0); }

PhaseState NormalFormTransform::apply(const PhaseState& state) const {
  const double root = std::sqrt(epsilon_);
  if (sup_norm(state.action) > 2.0 * root * (1.0 + 1e-12))
    throw ValidationError("transform input lies outside B_{2 sqrt(eps)}");
  PhaseState out = map(state);
  if (sup_norm(out.action) > 3.0 * root * (1.0 + 1e-12))
    throw NumericError("transform image escapes B_{3 sqrt(eps)}: eps too large");
  return out;
}

PhaseState NormalFormTransform::inverse(const PhaseState& state) const {
  const double root = std::sqrt(epsilon_);
  if (sup_norm(state.action) > 3.0 * root * (1.0 + 1e-12))
    throw ValidationError("inverse transform input lies outside B_{3 sqrt(eps)}");
  return inverse_map(state);
}

PhaseState apply_transform(const GeneratorField& generator, double epsilon, const PhaseState& state) {
  return NormalFormTransform(generator, epsilon).apply(state);
}

PhaseState inverse_transform(const GeneratorField& generator, double epsilon, const PhaseState& state) {
  return NormalFormTransform(generator, epsilon).inverse(state);
}

RemainderReport remainder_report(const NearIntegrableSystem& adapted, const FourierPerturbation& f_omega,
                                 const GeneratorField& generator, double epsilon, double mu,
                                 const SamplingOptions& options) {
  RemainderReport report;
  report.epsilon = epsilon;
  report.mu = mu;
  report.sample_count = options.samples;
  if (epsilon == 0.0 || options.samples == 0) return report;
  if (!(epsilon > 0.0)) throw ValidationError("eps must be >= 0");

  const std::size_t n = adapted.n();
  const auto ni = static_cast<Eigen::Index>(n);
  const NormalFormTransform phi(generator, epsilon);
  const double radius = 2.0 * std::sqrt(epsilon);
  const double step = std::sqrt(epsilon) * 1e-3;

  auto remainder = [&](const Vector& theta, const Vector& action, Vector* image_action) {
    const PhaseState img = phi.map(PhaseState::at(theta, action));
    if (image_action) *image_action = img.action;
    const Vector moved = img.action - action;
    return adapted.h().difference(action, moved) + epsilon * adapted.f().eval(img.theta, img.action) -
           epsilon * f_omega.eval(theta, action);
  };

  struct Partial {
    double disp = 0.0, dtheta = 0.0, daction = 0.0;
  };
  auto work = [&](std::size_t begin, std::size_t end, Partial& out) {
    Vector theta(ni), action(ni), image(ni);
    for (std::size_t s = begin; s < end; ++s) {
      const std::uint64_t index = options.seed + s + 1;
      for (std::size_t j = 0; j < n; ++j) {
        theta[static_cast<Eigen::Index>(j)] = halton(index, j);
        action[static_cast<Eigen::Index>(j)] = (2.0 * halton(index, n + j) - 1.0) * radius;
      }
      remainder(theta, action, &image);
      out.disp = std::max(out.disp, sup_norm(image - action));
      for (Eigen::Index j = 0; j < ni; ++j) {
        Vector tp = theta, tm = theta;
        tp[j] += step;
        tm[j] -= step;
        const double dt = (remainder(tp, action, nullptr) - remainder(tm, action, nullptr)) / (2.0 * step);
        out.dtheta = std::max(out.dtheta, std::abs(dt));
        Vector ap = action, am = action;
        ap[j] += step;
        am[j] -= step;
        const double da = (remainder(theta, ap, nullptr) - remainder(theta, am, nullptr)) / (2.0 * step);
        out.daction = std::max(out.daction, std::abs(da));
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.samples)));
  std::vector<Partial> partials(threads);
  if (threads == 1) {
    work(0, options.samples, partials[0]);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (options.samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(options.samples, b + chunk);
      pool.emplace_back([&, b, e, t] { work(b, e, partials[t]); });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& p : partials) {
    report.sup_displacement = std::max(report.sup_displacement, p.disp);
    report.sup_dtheta = std::max(report.sup_dtheta, p.dtheta);
    report.sup_dI = std::max(report.sup_dI, p.daction);
  }
  return report;
}

EstimateVerification verify_estimates(const NearIntegrableSystem& system, const ResonanceData& resonance,
                                         const std::vector<double>& eps_list, const EstimateOptions& options) {
  if (eps_list.empty()) throw ValidationError("eps list is empty");
  const NearIntegrableSystem adapted = adapted_system(system, resonance);
  const FourierPerturbation f_omega = resonant_average(adapted.f(), resonance.d);
  const int q = std::max(1, adapted.f().max_order());

  double eps_min = std::numeric_limits<double>::infinity();
  for (double e : eps_list) {
    if (!(e >= 0.0)) throw ValidationError("eps values must be >= 0");
    if (e > 0.0) eps_min = std::min(eps_min, e);
  }
  const double x_max = std::isfinite(eps_min) ? options.kappa / std::sqrt(eps_min) : 1.0;
  const SmallDivisorProfile profile =
      SmallDivisorProfile::covering(resonance.omega_tilde, options.kappa, x_max, std::max(64, q));
  const GeneratorField generator = build_generator(adapted, resonance, q, profile);

  EstimateVerification out;
  out.q = q;
  out.kappa = options.kappa;
  std::vector<double> eps_v, sd, st, si, rd, rt, ri;
  for (double eps : eps_list) {
    const double mu = profile.mu(std::sqrt(eps));
    EstimateRow row;
    row.report = remainder_report(adapted.with_epsilon(eps), f_omega, generator, eps, mu, options.sampling);
    const double root = std::sqrt(eps);
    row.bound_displacement = root * mu;
    row.bound_dtheta = eps * mu;
    row.bound_dI = root * mu;
    auto ratio = [](double v, double b) { return b > 0.0 ? v / b : 0.0; };
    row.ratio_displacement = ratio(row.report.sup_displacement, row.bound_displacement);
    row.ratio_dtheta = ratio(row.report.sup_dtheta, row.bound_dtheta);
    row.ratio_dI = ratio(row.report.sup_dI, row.bound_dI);
    eps_v.push_back(eps);
    sd.push_back(row.report.sup_displacement);
    st.push_back(row.report.sup_dtheta);
    si.push_back(row.report.sup_dI);
    rd.push_back(row.ratio_displacement);
    rt.push_back(row.ratio_dtheta);
    ri.push_back(row.ratio_dI);
    out.rows.push_back(row);
  }
  out.displacement = summarize(eps_v, sd, rd);
  out.dtheta = summarize(eps_v, st, rt);
  out.dI = summarize(eps_v, si, ri);
  return out;
}

}  // namespace microdrift
