#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace irtgrid {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// Diverging map anchored symmetrically at +-absmax so zero is always the
/// midpoint: negative values blend toward the red end, positive toward the
/// blue end.
struct DivergingPalette {
  Rgb negative{178, 24, 43};    // red extreme
  Rgb midpoint{247, 247, 247};  // near white
  Rgb positive{33, 102, 172};   // blue extreme
  Rgb masked{150, 150, 150};
};

/// Linear blend at value/absmax; the palette midpoint for absmax == 0.
Rgb palette_color(const DivergingPalette& palette, double value, double absmax);

std::string rgb_hex(const Rgb& color);

struct HeatmapOptions {
  DivergingPalette palette;
  bool annotate = false;  // print the value inside each cell
  std::string title;
  std::string x_label = "test bin";
  std::string y_label = "train bin";
  int cell_size = 44;
};

/// Standalone SVG: K x K colored cells (train bin 0 in the top row), axis
/// labels, masked diagonal cells gray, optional numeric annotations.
/// Deterministic text output for identical inputs.
std::string render_heatmap_svg(const std::vector<std::vector<double>>& matrix, bool mask_diagonal,
                               const HeatmapOptions& options = {});

}  // namespace irtgrid
