#include "irtgrid/svg_heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "irtgrid/errors.hpp"

namespace irtgrid {

namespace {

std::uint8_t blend(std::uint8_t from, std::uint8_t to, double t) {
  const double v = static_cast<double>(from) + t * (static_cast<double>(to) - from);
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string annotation_text(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

}  // namespace

Rgb palette_color(const DivergingPalette& palette, double value, double absmax) {
  if (!std::isfinite(value)) {
    return palette.masked;
  }
  if (absmax <= 0.0) {
    return palette.midpoint;
  }
  const double t = std::clamp(value / absmax, -1.0, 1.0);
  if (t < 0.0) {
    return {blend(palette.midpoint.r, palette.negative.r, -t),
            blend(palette.midpoint.g, palette.negative.g, -t),
            blend(palette.midpoint.b, palette.negative.b, -t)};
  }
  return {blend(palette.midpoint.r, palette.positive.r, t),
          blend(palette.midpoint.g, palette.positive.g, t),
          blend(palette.midpoint.b, palette.positive.b, t)};
}

std::string rgb_hex(const Rgb& color) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", color.r, color.g, color.b);
  return buf;
}

std::string render_heatmap_svg(const std::vector<std::vector<double>>& matrix, bool mask_diagonal,
                               const HeatmapOptions& options) {
  const std::size_t k = matrix.size();
  if (k == 0) {
    throw PreconditionError("render_heatmap_svg: empty matrix");
  }
  for (const auto& row : matrix) {
    if (row.size() != k) {
      throw PreconditionError("render_heatmap_svg: matrix is not square");
    }
  }

  double absmax = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t e = 0; e < k; ++e) {
      if (mask_diagonal && t == e) continue;
      if (std::isfinite(matrix[t][e])) {
        absmax = std::max(absmax, std::abs(matrix[t][e]));
      }
    }
  }

  const int cell = options.cell_size;
  const int margin_left = 58;
  const int margin_top = options.title.empty() ? 30 : 52;
  const int margin_bottom = 52;
  const int margin_right = 16;
  const int grid_px = cell * static_cast<int>(k);
  const int width = margin_left + grid_px + margin_right;
  const int height = margin_top + grid_px + margin_bottom;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  if (!options.title.empty()) {
    svg << "  <text x=\"" << (margin_left + grid_px / 2) << "\" y=\"20\" font-family=\"sans-serif\""
        << " font-size=\"14\" text-anchor=\"middle\">" << escape_xml(options.title) << "</text>\n";
  }

  // Train bin 0 on the top row; test bin 0 in the leftmost column.
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t e = 0; e < k; ++e) {
      const bool masked = (mask_diagonal && t == e) || !std::isfinite(matrix[t][e]);
      const Rgb color = masked ? options.palette.masked
                               : palette_color(options.palette, matrix[t][e], absmax);
      const int x = margin_left + static_cast<int>(e) * cell;
      const int y = margin_top + static_cast<int>(t) * cell;
      svg << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"" << rgb_hex(color) << "\" stroke=\"#ffffff\"/>\n";
      if (options.annotate && !masked) {
        svg << "  <text x=\"" << (x + cell / 2) << "\" y=\"" << (y + cell / 2 + 4)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
            << annotation_text(matrix[t][e]) << "</text>\n";
      }
    }
  }

  // Tick labels: 0 easiest, K-1 hardest on both axes.
  for (std::size_t i = 0; i < k; ++i) {
    svg << "  <text x=\"" << (margin_left + static_cast<int>(i) * cell + cell / 2) << "\" y=\""
        << (margin_top + grid_px + 14)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << i
        << "</text>\n";
    svg << "  <text x=\"" << (margin_left - 8) << "\" y=\""
        << (margin_top + static_cast<int>(i) * cell + cell / 2 + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << i
        << "</text>\n";
  }
  svg << "  <text x=\"" << (margin_left + grid_px / 2) << "\" y=\"" << (margin_top + grid_px + 36)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << escape_xml(options.x_label) << "</text>\n";
  svg << "  <text x=\"14\" y=\"" << (margin_top + grid_px / 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 14 " << (margin_top + grid_px / 2) << ")\">"
      << escape_xml(options.y_label) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace irtgrid
