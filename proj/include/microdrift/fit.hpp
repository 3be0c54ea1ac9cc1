#pragma once

#include <cstddef>
#include <vector>

namespace microdrift {

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log residuals
  std::size_t points = 0;
  bool valid() const { return points >= 2; }
};

/// Least-squares line through (log x, log y). Points with x <= 0 or y <= 0
/// are skipped; fewer than two usable points leave the fit invalid.
ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

/// n points log-spaced from `from` to `to` inclusive.
std::vector<double> log_spaced(double from, double to, std::size_t n);

}  // namespace microdrift
