#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fgdim::cli {

struct LogLogPlot {
  std::string title;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;
  /// Fitted line log y = intercept + slope log x.
  std::optional<std::pair<double, double>> fit;  // (slope, intercept)
  /// Reference slope drawn through the first point.
  std::optional<double> reference_slope;
};

/// Self-contained SVG document.
void write_svg(std::ostream& os, const LogLogPlot& plot);

}  // namespace fgdim::cli
