#pragma once

// Static SVG charts: polytope overlays and simple line plots. Rendering is
// deterministic to the byte: fixed canvas, fixed palette, snprintf number
// formatting, no timestamps and no randomness.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "flexregion/ffor.hpp"
#include "flexregion/geometry.hpp"

namespace flexregion {
namespace svg {

inline std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace detail {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 64.0, kRight = 24.0, kTop = 32.0, kBottom = 52.0;

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
      "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return colors;
}

struct Range {
  double lo = -1.0, hi = 1.0;

  void grow(double v) {
    if (std::isnan(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

// Symmetric padding plus a guard against zero span.
inline void finish(Range& r, bool seeded) {
  if (!seeded) {
    r.lo = -1.0;
    r.hi = 1.0;
    return;
  }
  if (r.hi - r.lo < 1e-9) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  const double pad = 0.08 * (r.hi - r.lo);
  r.lo -= pad;
  r.hi += pad;
}

inline double tick_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0}) {
    if (raw <= mult * mag) return mult * mag;
  }
  return 10.0 * mag;
}

struct Mapper {
  Range x, y;

  double sx(double v) const {
    return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight);
  }
  double sy(double v) const {
    return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom);
  }
};

inline void open_svg(std::string& out) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\" font-family=\"Helvetica,Arial,sans-serif\" "
         "font-size=\"12\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
}

inline void draw_axes(std::string& out, const Mapper& map,
                      const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) +
         "\" y2=\"" + fmt(y0) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0) +
         "\" y2=\"" + fmt(y1) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  const double xs = tick_step(map.x.hi - map.x.lo);
  for (double v = std::ceil(map.x.lo / xs) * xs; v <= map.x.hi + 1e-12; v += xs) {
    const double px = map.sx(v);
    out += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(px) +
           "\" y2=\"" + fmt(y0 + 5) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(y0 + 18) +
           "\" text-anchor=\"middle\" fill=\"#333333\">" + fmt(v) + "</text>\n";
  }
  const double ys = tick_step(map.y.hi - map.y.lo);
  for (double v = std::ceil(map.y.lo / ys) * ys; v <= map.y.hi + 1e-12; v += ys) {
    const double py = map.sy(v);
    out += "<line x1=\"" + fmt(x0 - 5) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(x0) +
           "\" y2=\"" + fmt(py) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fmt(x0 - 8) + "\" y=\"" + fmt(py + 4) +
           "\" text-anchor=\"end\" fill=\"#333333\">" + fmt(v) + "</text>\n";
  }
  out += "<text x=\"" + fmt((x0 + x1) / 2) + "\" y=\"" + fmt(kHeight - 12) +
         "\" text-anchor=\"middle\" fill=\"#111111\">" + x_label + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt((y0 + y1) / 2) +
         "\" text-anchor=\"middle\" fill=\"#111111\" transform=\"rotate(-90 16 " +
         fmt((y0 + y1) / 2) + ")\">" + y_label + "</text>\n";
}

inline void draw_legend(std::string& out, const std::vector<std::string>& labels) {
  double ly = kTop + 8.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& color = palette()[i % palette().size()];
    out += "<rect x=\"" + fmt(kWidth - kRight - 150) + "\" y=\"" + fmt(ly - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + fmt(kWidth - kRight - 133) + "\" y=\"" + fmt(ly + 1) +
           "\" fill=\"#111111\">" + labels[i] + "</text>\n";
    ly += 18.0;
  }
}

}  // namespace detail

// Overlay of flexibility polygons in the deviation plane, one legend entry
// per item. Degenerate polytopes render as a dot or a segment.
inline std::string polytope_overlay_svg(
    const std::vector<std::pair<std::string, Polytope>>& items,
    const std::string& title = {}) {
  detail::Mapper map;
  bool seeded = false;
  for (const auto& [label, poly] : items) {
    (void)label;
    for (const Vec2& v : poly.vertices) {
      map.x.grow(v.x);
      map.y.grow(v.y);
      seeded = true;
    }
  }
  detail::finish(map.x, seeded);
  detail::finish(map.y, seeded);

  std::string out;
  detail::open_svg(out);
  detail::draw_axes(out, map, "dP (p.u.)", "dQ (p.u.)");
  if (!title.empty())
    out += "<text x=\"" + fmt(detail::kWidth / 2) +
           "\" y=\"20\" text-anchor=\"middle\" fill=\"#111111\">" + title +
           "</text>\n";

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& [label, poly] = items[i];
    labels.push_back(label);
    const std::string& color = detail::palette()[i % detail::palette().size()];
    const auto& v = poly.vertices;
    if (v.empty()) continue;
    if (v.size() == 1) {
      out += "<circle cx=\"" + fmt(map.sx(v[0].x)) + "\" cy=\"" + fmt(map.sy(v[0].y)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
      continue;
    }
    std::string d = "M " + fmt(map.sx(v[0].x)) + " " + fmt(map.sy(v[0].y));
    for (std::size_t k = 1; k < v.size(); ++k)
      d += " L " + fmt(map.sx(v[k].x)) + " " + fmt(map.sy(v[k].y));
    if (v.size() >= 3) {
      d += " Z";
      out += "<path d=\"" + d + "\" fill=\"" + color +
             "\" fill-opacity=\"0.18\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
    } else {
      out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
    }
  }
  detail::draw_legend(out, labels);
  out += "</svg>\n";
  return out;
}

struct LineSeries {
  std::string label;
  std::vector<Vec2> points;
};

inline std::string line_chart_svg(const std::vector<LineSeries>& series,
                                  const std::string& x_label,
                                  const std::string& y_label,
                                  const std::string& title = {}) {
  detail::Mapper map;
  bool seeded = false;
  for (const auto& s : series) {
    for (const Vec2& p : s.points) {
      map.x.grow(p.x);
      map.y.grow(p.y);
      seeded = true;
    }
  }
  detail::finish(map.x, seeded);
  detail::finish(map.y, seeded);

  std::string out;
  detail::open_svg(out);
  detail::draw_axes(out, map, x_label, y_label);
  if (!title.empty())
    out += "<text x=\"" + fmt(detail::kWidth / 2) +
           "\" y=\"20\" text-anchor=\"middle\" fill=\"#111111\">" + title +
           "</text>\n";
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    labels.push_back(series[i].label);
    const auto& pts = series[i].points;
    if (pts.empty()) continue;
    const std::string& color = detail::palette()[i % detail::palette().size()];
    std::string d = "M " + fmt(map.sx(pts[0].x)) + " " + fmt(map.sy(pts[0].y));
    for (std::size_t k = 1; k < pts.size(); ++k)
      d += " L " + fmt(map.sx(pts[k].x)) + " " + fmt(map.sy(pts[k].y));
    out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    for (const Vec2& p : pts)
      out += "<circle cx=\"" + fmt(map.sx(p.x)) + "\" cy=\"" + fmt(map.sy(p.y)) +
             "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
  }
  detail::draw_legend(out, labels);
  out += "</svg>\n";
  return out;
}

}  // namespace svg
}  // namespace flexregion
