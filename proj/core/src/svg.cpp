#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "swar/harness.hpp"

namespace swar::harness {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
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

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string emit_svg(const std::vector<CurveSeries>& curves, const std::string& title, const std::string& x_label,
                     const std::string& y_label) {
  if (curves.empty()) throw ContractError("emit_svg: no curves");
  struct Stats {
    std::vector<double> mean, sd;
  };
  std::vector<Stats> stats;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& c : curves) {
    if (c.x.empty() || c.runs.empty()) throw ContractError("emit_svg: series '" + c.label + "' is empty");
    Stats st;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      double sum = 0.0, sq = 0.0;
      for (const auto& run : c.runs) {
        if (run.size() != c.x.size()) throw ContractError("emit_svg: run length does not match x");
        sum += run[i];
      }
      const double n = static_cast<double>(c.runs.size());
      const double mean = sum / n;
      for (const auto& run : c.runs) sq += (run[i] - mean) * (run[i] - mean);
      const double sd = c.runs.size() > 1 ? std::sqrt(sq / n) : 0.0;
      st.mean.push_back(mean);
      st.sd.push_back(sd);
      x_min = std::min(x_min, c.x[i]);
      x_max = std::max(x_max, c.x[i]);
      y_min = std::min(y_min, mean - sd);
      y_max = std::max(y_max, mean + sd);
    }
    stats.push_back(std::move(st));
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_max += 1.0;
    y_min -= 1.0;
  }

  const double width = 640, height = 400, left = 70, right = 160, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << escape(title) << "</text>\n"
      << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
      << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_min + (x_max - x_min) * k / 4.0;
    const double yv = y_min + (y_max - y_min) * k / 4.0;
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">" << tick(xv)
        << "</text>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 10) << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(top + ph / 2) << ")\">" << escape(y_label) << "</text>\n</g>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& series = curves[c];
    const auto& st = stats[c];
    const char* color = kPalette[c % std::size(kPalette)];
    if (series.runs.size() > 1) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < series.x.size(); ++i) svg << num(px(series.x[i])) << ',' << num(py(st.mean[i] + st.sd[i])) << ' ';
      for (std::size_t i = series.x.size(); i-- > 0;) svg << num(px(series.x[i])) << ',' << num(py(st.mean[i] - st.sd[i])) << ' ';
      svg << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series.x.size(); ++i) svg << num(px(series.x[i])) << ',' << num(py(st.mean[i])) << ' ';
    svg << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(c);
    svg << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 32)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(left + pw + 38) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(series.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace swar::harness
