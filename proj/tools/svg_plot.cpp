#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace fgdim::cli {

namespace {

constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace

void write_svg(std::ostream& os, const LogLogPlot& p) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (p.x[i] > 0 && p.y[i] > 0) {
      lx.push_back(std::log10(p.x[i]));
      ly.push_back(std::log10(p.y[i]));
    }
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!lx.empty()) {
    x0 = *std::min_element(lx.begin(), lx.end());
    x1 = *std::max_element(lx.begin(), lx.end());
    y0 = *std::min_element(ly.begin(), ly.end());
    y1 = *std::max_element(ly.begin(), ly.end());
  }
  x0 = std::floor(x0 * 10) / 10 - 0.05;
  x1 = std::ceil(x1 * 10) / 10 + 0.05;
  y0 = std::floor(y0) - 0.1;
  y1 = std::ceil(y1) + 0.1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto Y = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * ph; };

  os << std::fixed << std::setprecision(2);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"15\">" << esc(p.title) << "</text>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = int(std::ceil(y0)); d <= int(std::floor(y1)); ++d) {
    os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << Y(d) << "\" y2=\""
       << Y(d) << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << kLeft - 6 << "\" y=\"" << Y(d) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d
       << "</text>\n";
  }
  for (double v : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0}) {
    const double l = std::log10(v);
    if (l < x0 || l > x1) continue;
    os << "<text x=\"" << X(l) << "\" y=\"" << kTop + ph + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << v
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">|xi|</text>\n"
     << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 " << kTop + ph / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">moment</text>\n";

  auto line = [&](double slope, double icept, const char* color, const char* dash) {
    os << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(icept + slope * x0) << "\" x2=\"" << X(x1)
       << "\" y2=\"" << Y(icept + slope * x1) << "\" stroke=\"" << color
       << "\" stroke-width=\"1.5\"" << dash << " clip-path=\"url(#plot)\"/>\n";
  };
  os << "<clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\"/></clipPath>\n";
  if (p.fit) {
    // Natural-log fit converted to base 10.
    line(p.fit->first, p.fit->second / std::log(10.0), "#c0392b", "");
  }
  if (p.reference_slope && !lx.empty()) {
    line(*p.reference_slope, ly[0] - *p.reference_slope * lx[0], "#7f8c8d",
         " stroke-dasharray=\"6 4\"");
  }
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (!(p.x[i] > 0 && p.y[i] > 0)) continue;
    const double cx = X(std::log10(p.x[i])), cy = Y(std::log10(p.y[i]));
    if (i < p.yerr.size() && p.yerr[i] > 0 && p.y[i] - p.yerr[i] > 0) {
      os << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\""
         << Y(std::log10(p.y[i] + p.yerr[i])) << "\" y2=\"" << Y(std::log10(p.y[i] - p.yerr[i]))
         << "\" stroke=\"#2c3e50\"/>\n";
    }
    os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3.5\" fill=\"#2c3e50\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace fgdim::cli
