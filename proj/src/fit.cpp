#include "microdrift/fit.hpp"

#include "microdrift/errors.hpp"

#include <cmath>

namespace microdrift {

ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit: x and y differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  ScalingFit fit;
  fit.points = lx.size();
  if (fit.points < 2) return fit;
  const double n = static_cast<double>(fit.points);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) {
    fit.points = 0;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<double> log_spaced(double from, double to, std::size_t n) {
  if (!(from > 0.0) || !(to > 0.0)) throw ValidationError("log spacing needs positive end points");
  if (n == 0) return {};
  if (n == 1) return {from};
  std::vector<double> out(n);
  const double a = std::log10(from), b = std::log10(to);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = from;
  out.back() = to;
  return out;
}

}  // namespace microdrift
