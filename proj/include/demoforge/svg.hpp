#pragma once

#include <span>
#include <string>
#include <utility>

#include "demoforge/analytics.hpp"
#include "demoforge/model.hpp"
#include "demoforge/winprob.hpp"

namespace demoforge {

// All renderers emit standalone SVG 1.1 with fixed two-decimal coordinate
// formatting, so identical inputs give byte-identical output.

// Top-down view of one frame on the abstract map square: cyan CT / orange T
// glyphs with HP bars and view-direction lines, red fire and gray smoke
// circles, a white triangle where the bomb is.
std::string render_frame_svg(const Frame& frame, const std::string& map_name);

// Cell intensity is log(1+count) scaled against the densest cell.
std::string render_heatmap_svg(const HeatmapGrid& grid, const std::string& title);

// Win-probability polyline over one round, y in [0,1].
std::string render_win_curve_svg(std::span<const std::pair<Tick, double>> curve,
                                 const std::string& title);

// Reliability diagram: per-bin accuracy bars against the diagonal.
std::string render_reliability_svg(const CalibrationReport& report, const std::string& title);

}  // namespace demoforge
