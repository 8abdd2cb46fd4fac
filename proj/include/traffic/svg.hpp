#pragma once

#include <string>

#include "traffic/experiments.hpp"

namespace traffic {

struct SvgOptions {
  int width = 860;
  int height = 560;
  std::string title;
  std::string x_label = "concentration k";
  std::string y_label = "flow q";
};

/// Static flow-concentration chart: gray dots for samples, orange squares
/// for free-flow-classified samples, dashed red mean polyline, solid blue
/// deterministic polyline. Pure function of its input.
std::string render_svg(const DiagramScan& scan, const SvgOptions& opt = {});

}  // namespace traffic
