#pragma once

#include <string>
#include <utility>
#include <vector>

namespace okr::harness {

/// One polyline on the log-log chart.
struct SvgSeries {
  std::string label;
  std::string color;
  bool dashed = false;
  std::vector<std::pair<double, double>> points;  // (t, value), both > 0
};

/// Static log-log line chart (error curves with bound overlays). Points with
/// nonpositive coordinates are dropped; an empty chart is still valid SVG.
std::string render_loglog_svg(const std::string& title, const std::vector<SvgSeries>& series);

void write_file(const std::string& path, const std::string& content);

}  // namespace okr::harness
