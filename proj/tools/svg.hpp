#pragma once

#include <string>
#include <vector>

namespace occuhmm::plot {

struct Layer {
  enum class Kind { line, points, segments };
  Kind kind = Kind::line;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;    // stroke width, or point radius
  double opacity = 1.0;
  std::string label;     // legend entry when non-empty
  // segments: one colour per consecutive pair (x[i-1], y[i-1]) -> (x[i], y[i]), indexed by i
  std::vector<std::string> segment_colors;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Layer> layers;
  bool fixed_y = false;  // use y_min..y_max instead of the data range
  double y_min = 0.0;
  double y_max = 1.0;
  bool equal_aspect = false;
};

// Panels side by side. Lines break at NaN. Output depends only on the inputs.
std::string render(const std::vector<Panel>& panels, int panel_width = 420, int panel_height = 340);

// Colour of state i (0-based).
const std::string& state_color(int i);

}  // namespace occuhmm::plot
