#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace okr::harness {

namespace {

constexpr double kWidth = 820, kHeight = 560;
constexpr double kLeft = 70, kRight = 790, kTop = 40, kBottom = 500;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double decade) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "1e%d", int(std::lround(decade)));
  return buf;
}

}  // namespace

std::string render_loglog_svg(const std::string& title, const std::vector<SvgSeries>& series) {
  double lx0 = std::numeric_limits<double>::infinity(), lx1 = -lx0;
  double ly0 = lx0, ly1 = -lx0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!(x > 0) || !(y > 0)) continue;
      lx0 = std::min(lx0, std::log10(x));
      lx1 = std::max(lx1, std::log10(x));
      ly0 = std::min(ly0, std::log10(y));
      ly1 = std::max(ly1, std::log10(y));
    }
  }
  if (!(lx0 <= lx1)) {  // nothing plottable
    lx0 = 0, lx1 = 1, ly0 = 0, ly1 = 1;
  }
  if (lx1 - lx0 < 1e-9) lx1 = lx0 + 1;
  if (ly1 - ly0 < 1e-9) ly1 = ly0 + 1;
  const double pad = 0.05 * (ly1 - ly0);
  ly0 -= pad;
  ly1 += pad;

  auto sx = [&](double x) { return kLeft + (std::log10(x) - lx0) / (lx1 - lx0) * (kRight - kLeft); };
  auto sy = [&](double y) {
    return kBottom - (std::log10(y) - ly0) / (ly1 - ly0) * (kBottom - kTop);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";

  // axes and decade gridlines
  out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(kRight) +
         "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
         "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
  for (double d = std::ceil(lx0); d <= std::floor(lx1) + 1e-9; d += 1) {
    const double x = sx(std::pow(10.0, d));
    out += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
           fmt(kBottom) + "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(kBottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt_tick(d) +
           "</text>\n";
  }
  for (double d = std::ceil(ly0); d <= std::floor(ly1) + 1e-9; d += 1) {
    const double y = sy(std::pow(10.0, d));
    out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kRight) +
           "\" y2=\"" + fmt(y) + "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt_tick(d) +
           "</text>\n";
  }

  double legend_y = kTop + 8;
  for (const auto& s : series) {
    std::string path;
    bool started = false;
    for (const auto& [x, y] : s.points) {
      if (!(x > 0) || !(y > 0)) continue;
      path += started ? " L " : "M ";
      path += fmt(sx(x)) + " " + fmt(sy(y));
      started = true;
    }
    if (started) {
      out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.6\"";
      if (s.dashed) out += " stroke-dasharray=\"6 4\"";
      out += "/>\n";
    }
    out += "<line x1=\"" + fmt(kRight - 180) + "\" y1=\"" + fmt(legend_y) + "\" x2=\"" +
           fmt(kRight - 150) + "\" y2=\"" + fmt(legend_y) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"1.6\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    out += "<text x=\"" + fmt(kRight - 144) + "\" y=\"" + fmt(legend_y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.label + "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace okr::harness
