#ifndef SPD_SVG_HPP
#define SPD_SVG_HPP

#include <string>
#include <vector>

#include "spd/geom.hpp"

namespace spd::svg {

struct Polyline {
  std::vector<geom::Vec2> points;
  std::string color = "#1f77b4";
  double stroke_width = 1.5;
  std::string label;
};

/// Minimal deterministic line plot: data polylines, box axes with ticks and
/// a legend. All numbers are formatted with 6 significant digits, so equal
/// plots serialize to identical bytes.
struct SvgPlot {
  int width = 800;
  int height = 560;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Polyline> series;
};

/// Renders the plot to a well-formed SVG 1.1 document.
std::string render_svg(const SvgPlot& plot);

/// Renders and writes atomically (temp file + rename).
/// Throws IoError for unwritable paths or non-finite coordinates.
void emit_svg(const SvgPlot& plot, const std::string& path);

/// Fixed series palette used by the CLI plots.
const char* palette(std::size_t index);

}  // namespace spd::svg

#endif  // SPD_SVG_HPP
