#include "microdrift/svg.hpp"


#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace microdrift {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  if (log) std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  else std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish(bool log) {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = log ? 0.5 : std::max(0.5, 0.1 * std::abs(hi));
      lo -= pad;
      hi += pad;
    }
    if (log) {
      lo = std::floor(lo);
      hi = std::ceil(hi);
    }
  }
};

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, bool log_x, bool log_y)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)), log_x_(log_x),
      log_y_(log_y) {}

void SvgPlot::add(PlotSeries series) { series_.push_back(std::move(series)); }

std::string SvgPlot::render() const {
  auto tx = [&](double v) { return log_x_ ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y_ ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x_ || x > 0) && (!log_y_ || y > 0);
  };
  Range rx, ry;
  for (const auto& s : series_)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (usable(s.x[i], s.y[i])) {
        rx.add(tx(s.x[i]));
        ry.add(ty(s.y[i]));
      }
  rx.finish(log_x_);
  ry.finish(log_y_);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_)
    << "</text>\n";
  o << "<rect class=\"frame\" x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [](const Range& r, bool log) {
    std::vector<double> t;
    if (log) {
      const int step = std::max(1, static_cast<int>(std::ceil((r.hi - r.lo) / 8.0)));
      for (double v = r.lo; v <= r.hi + 1e-9; v += step) t.push_back(v);
    } else {
      for (int i = 0; i <= 5; ++i) t.push_back(r.lo + (r.hi - r.lo) * i / 5.0);
    }
    return t;
  };
  for (double v : ticks(rx, log_x_)) {
    const double x = kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw;
    o << "<line class=\"tick\" x1=\"" << num(x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(x) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << tick_label(v, log_x_) << "</text>\n";
  }
  for (double v : ticks(ry, log_y_)) {
    const double y = kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph;
    o << "<line class=\"tick\" x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\""
      << num(y) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(v, log_y_)
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(x_label_) << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(y_label_) << "</text>\n";

  double legend_y = kTop + 16;
  for (const auto& s : series_) {
    std::ostringstream pts;
    std::vector<std::pair<double, double>> xy;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (usable(s.x[i], s.y[i])) xy.emplace_back(px(s.x[i]), py(s.y[i]));
    if (s.line && xy.size() >= 2) {
      for (std::size_t i = 0; i < xy.size(); ++i) pts << (i ? " " : "") << num(xy[i].first) << ',' << num(xy[i].second);
      o << "<polyline class=\"line\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    }
    if (s.markers)
      for (const auto& [x, y] : xy)
        o << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3.5\" fill=\"" << s.color
          << "\"/>\n";
    if (!s.label.empty()) {
      o << "<text class=\"legend\" x=\"" << kLeft + 10 << "\" y=\"" << num(legend_y) << "\" fill=\"" << s.color
        << "\">" << escape(s.label) << "</text>\n";
      legend_y += 15;
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace microdrift
