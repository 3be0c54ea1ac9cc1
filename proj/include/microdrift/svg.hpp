#pragma once

#include <string>
#include <vector>

namespace microdrift {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = false;
  bool dashed = false;
};

/// Minimal static SVG line/scatter plot. Log axes drop non-positive values.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label, bool log_x = false, bool log_y = false);
  void add(PlotSeries series);
  std::string render() const;

 private:
  std::string title_, x_label_, y_label_;
  bool log_x_, log_y_;
  std::vector<PlotSeries> series_;
};

}  // namespace microdrift
