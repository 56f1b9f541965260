#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace occuhmm::plot {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

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

// Tick positions with a 1/2/5 step covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) out.push_back(t);
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    } else if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double pad = 0.03 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

const std::string& state_color(int i) {
  static const std::vector<std::string> palette = {"#e69f00", "#56b4e9", "#009e73", "#cc79a7",
                                                   "#0072b2", "#d55e00", "#f0e442", "#000000"};
  return palette[static_cast<std::size_t>(i) % palette.size()];
}

std::string render(const std::vector<Panel>& panels, int panel_width, int panel_height) {
  const double left = 58, right = 16, top = 30, bottom = 46;
  std::ostringstream out;
  const int width = panel_width * static_cast<int>(std::max<std::size_t>(panels.size(), 1));
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << panel_height
      << "\" viewBox=\"0 0 " << width << ' ' << panel_height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double ox = static_cast<double>(p) * panel_width;
    Range xr, yr;
    for (const auto& l : panel.layers) {
      for (double v : l.x) xr.add(v);
      for (double v : l.y) yr.add(v);
    }
    xr.finish();
    if (panel.fixed_y) {
      yr.lo = panel.y_min;
      yr.hi = panel.y_max;
    } else {
      yr.finish();
    }
    double pw = panel_width - left - right, ph = panel_height - top - bottom;
    if (panel.equal_aspect) {
      const double sx = pw / (xr.hi - xr.lo), sy = ph / (yr.hi - yr.lo);
      if (sx > sy) {
        const double extra = (pw / sy - (xr.hi - xr.lo)) / 2;
        xr.lo -= extra;
        xr.hi += extra;
      } else {
        const double extra = (ph / sx - (yr.hi - yr.lo)) / 2;
        yr.lo -= extra;
        yr.hi += extra;
      }
    }
    auto px = [&](double v) { return ox + left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double v) { return top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    out << "<g>\n";
    out << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(panel.title) << "</text>\n";
    out << "<rect x=\"" << num(ox + left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : ticks(xr.lo, xr.hi)) {
      out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(t)) << "\" y2=\""
          << num(top + ph + 4) << "\" stroke=\"#444\"/>";
      out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(yr.lo, yr.hi)) {
      out << "<line x1=\"" << num(ox + left - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(ox + left) << "\" y2=\""
          << num(py(t)) << "\" stroke=\"#444\"/>";
      out << "<text x=\"" << num(ox + left - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    out << "<text x=\"" << num(ox + left + pw / 2) << "\" y=\"" << num(panel_height - 8.0)
        << "\" text-anchor=\"middle\">" << escape(panel.x_label) << "</text>\n";
    out << "<text transform=\"translate(" << num(ox + 14) << ',' << num(top + ph / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(panel.y_label) << "</text>\n";

    out << "<clipPath id=\"clip" << p << "\"><rect x=\"" << num(ox + left) << "\" y=\"" << num(top) << "\" width=\""
        << num(pw) << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
    out << "<g clip-path=\"url(#clip" << p << ")\">\n";
    for (const auto& l : panel.layers) {
      const std::size_t n = std::min(l.x.size(), l.y.size());
      if (l.kind == Layer::Kind::points) {
        out << "<g fill=\"" << l.color << "\" fill-opacity=\"" << num(l.opacity) << "\">";
        for (std::size_t i = 0; i < n; ++i)
          if (std::isfinite(l.x[i]) && std::isfinite(l.y[i]))
            out << "<circle cx=\"" << num(px(l.x[i])) << "\" cy=\"" << num(py(l.y[i])) << "\" r=\"" << num(l.width) << "\"/>";
        out << "</g>\n";
      } else if (l.kind == Layer::Kind::segments) {
        out << "<g stroke-width=\"" << num(l.width) << "\" stroke-opacity=\"" << num(l.opacity) << "\">";
        for (std::size_t i = 1; i < n; ++i) {
          if (!std::isfinite(l.x[i - 1]) || !std::isfinite(l.y[i - 1]) || !std::isfinite(l.x[i]) || !std::isfinite(l.y[i]))
            continue;
          const std::string& c = i < l.segment_colors.size() ? l.segment_colors[i] : l.color;
          out << "<line x1=\"" << num(px(l.x[i - 1])) << "\" y1=\"" << num(py(l.y[i - 1])) << "\" x2=\"" << num(px(l.x[i]))
              << "\" y2=\"" << num(py(l.y[i])) << "\" stroke=\"" << c << "\"/>";
        }
        out << "</g>\n";
      } else {
        std::string pts;
        auto flush = [&] {
          if (!pts.empty())
            out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << num(l.width)
                << "\" stroke-opacity=\"" << num(l.opacity) << "\" points=\"" << pts << "\"/>\n";
          pts.clear();
        };
        for (std::size_t i = 0; i < n; ++i) {
          if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) {
            flush();
            continue;
          }
          if (!pts.empty()) pts += ' ';
          pts += num(px(l.x[i])) + ',' + num(py(l.y[i]));
        }
        flush();
      }
    }
    out << "</g>\n";

    double ly = top + 14;
    for (const auto& l : panel.layers) {
      if (l.label.empty()) continue;
      const double lx = ox + left + pw - 110;
      out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18) << "\" y2=\""
          << num(ly - 4) << "\" stroke=\"" << l.color << "\" stroke-width=\"3\"/>";
      out << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly) << "\">" << escape(l.label) << "</text>\n";
      ly += 15;
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace occuhmm::plot
