#include "spd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spd/errors.hpp"
#include "spd/io_util.hpp"

namespace spd::svg {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

// Largest "nice" step ({1,2,5} x 10^k) not exceeding the raw spacing.
double nice_step(double range, int target_ticks) {
  const double raw = range / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double step = 10.0;
  if (frac <= 1.0) step = 1.0;
  else if (frac <= 2.0) step = 2.0;
  else if (frac <= 5.0) step = 5.0;
  return step * mag;
}

struct Mapper {
  double x0, y0, w, h;           // viewport
  double xmin, xmax, ymin, ymax; // data bounds
  double mx(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double my(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

}  // namespace

const char* palette(std::size_t index) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return kColors[index % (sizeof(kColors) / sizeof(kColors[0]))];
}

std::string render_svg(const SvgPlot& plot) {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool have_data = false;
  for (const Polyline& pl : plot.series) {
    for (const geom::Vec2& p : pl.points) {
      if (!geom::is_finite(p)) {
        throw IoError("invalid plot: non-finite coordinate");
      }
      if (!have_data) {
        xmin = xmax = p.x;
        ymin = ymax = p.y;
        have_data = true;
      } else {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
    }
  }
  if (xmax - xmin <= 0.0) { xmax = xmin + 1.0; xmin -= 1.0; }
  if (ymax - ymin <= 0.0) { ymax = ymin + 1.0; ymin -= 1.0; }
  // 5% padding around the data.
  const double px = 0.05 * (xmax - xmin), py = 0.05 * (ymax - ymin);
  xmin -= px; xmax += px; ymin -= py; ymax += py;

  const double ml = 64.0, mr = 16.0, mt = plot.title.empty() ? 16.0 : 34.0, mb = 44.0;
  const Mapper m{ml, mt, plot.width - ml - mr, plot.height - mt - mb,
                 xmin, xmax, ymin, ymax};

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << plot.width << "\" height=\"" << plot.height << "\" viewBox=\"0 0 "
      << plot.width << " " << plot.height << "\">\n"
      << "<rect width=\"" << plot.width << "\" height=\"" << plot.height
      << "\" fill=\"white\"/>\n";

  if (!plot.title.empty()) {
    out << "<text x=\"" << fmt(plot.width / 2.0)
        << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << xml_escape(plot.title) << "</text>\n";
  }

  // Grid and ticks.
  out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const double xs = nice_step(xmax - xmin, 6);
  const double ys = nice_step(ymax - ymin, 6);
  std::ostringstream labels;
  labels << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-12 * xs; t += xs) {
    const double sx = m.mx(t);
    out << "<line x1=\"" << fmt(sx) << "\" y1=\"" << fmt(m.y0) << "\" x2=\"" << fmt(sx)
        << "\" y2=\"" << fmt(m.y0 + m.h) << "\"/>\n";
    labels << "<text x=\"" << fmt(sx) << "\" y=\"" << fmt(m.y0 + m.h + 16.0)
           << "\" text-anchor=\"middle\">" << fmt(t == 0.0 ? 0.0 : t) << "</text>\n";
  }
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-12 * ys; t += ys) {
    const double sy = m.my(t);
    out << "<line x1=\"" << fmt(m.x0) << "\" y1=\"" << fmt(sy) << "\" x2=\""
        << fmt(m.x0 + m.w) << "\" y2=\"" << fmt(sy) << "\"/>\n";
    labels << "<text x=\"" << fmt(m.x0 - 6.0) << "\" y=\"" << fmt(sy + 4.0)
           << "\" text-anchor=\"end\">" << fmt(t == 0.0 ? 0.0 : t) << "</text>\n";
  }
  out << "</g>\n" << labels.str() << "</g>\n";

  out << "<rect x=\"" << fmt(m.x0) << "\" y=\"" << fmt(m.y0) << "\" width=\""
      << fmt(m.w) << "\" height=\"" << fmt(m.h)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  if (!plot.x_label.empty()) {
    out << "<text x=\"" << fmt(m.x0 + m.w / 2.0) << "\" y=\""
        << fmt(plot.height - 8.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(plot.x_label) << "</text>\n";
  }
  if (!plot.y_label.empty()) {
    out << "<text x=\"14\" y=\"" << fmt(m.y0 + m.h / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 14 "
        << fmt(m.y0 + m.h / 2.0) << ")\">" << xml_escape(plot.y_label) << "</text>\n";
  }

  for (const Polyline& pl : plot.series) {
    if (pl.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << pl.color << "\" stroke-width=\""
        << fmt(pl.stroke_width) << "\" points=\"";
    for (std::size_t i = 0; i < pl.points.size(); ++i) {
      if (i) out << ' ';
      out << fmt(m.mx(pl.points[i].x)) << ',' << fmt(m.my(pl.points[i].y));
    }
    out << "\"/>\n";
  }

  // Legend.
  double ly = m.y0 + 14.0;
  for (const Polyline& pl : plot.series) {
    if (pl.label.empty()) continue;
    const double lx = m.x0 + m.w - 150.0;
    out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4.0) << "\" x2=\""
        << fmt(lx + 22.0) << "\" y2=\"" << fmt(ly - 4.0) << "\" stroke=\"" << pl.color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(lx + 28.0) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(pl.label)
        << "</text>\n";
    ly += 16.0;
  }

  out << "</svg>\n";
  return out.str();
}

void emit_svg(const SvgPlot& plot, const std::string& path) {
  io::write_atomic(path, render_svg(plot));
}

}  // namespace spd::svg
