#include "gp/svg.hpp"

#include <cmath>
#include <cstdio>

namespace gp {

namespace {

constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 16.0;
constexpr double kMarginBottom = 40.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

SvgFigure::SvgFigure(double width, double height)
    : width_(width), height_(height) {}

void SvgFigure::set_ranges(double x_min, double x_max, double y_min,
                           double y_max) {
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double xpad = 0.05 * (x_max - x_min);
  const double ypad = 0.05 * (y_max - y_min);
  x_min_ = x_min - xpad;
  x_max_ = x_max + xpad;
  y_min_ = y_min - ypad;
  y_max_ = y_max + ypad;
}

double SvgFigure::map_x(double x) const {
  return kMarginLeft + (x - x_min_) / (x_max_ - x_min_) *
                           (width_ - kMarginLeft - kMarginRight);
}

double SvgFigure::map_y(double y) const {
  return height_ - kMarginBottom -
         (y - y_min_) / (y_max_ - y_min_) *
             (height_ - kMarginTop - kMarginBottom);
}

void SvgFigure::add_band(const std::string& id, const Vector& xs,
                         const Vector& lo, const Vector& hi,
                         const std::string& fill) {
  std::string d;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    d += (i == 0 ? "M" : "L");
    d += fmt(map_x(xs[i])) + " " + fmt(map_y(hi[i])) + " ";
  }
  for (Eigen::Index i = xs.size() - 1; i >= 0; --i)
    d += "L" + fmt(map_x(xs[i])) + " " + fmt(map_y(lo[i])) + " ";
  d += "Z";
  elements_.push_back("<path id=\"" + id + "\" d=\"" + d + "\" fill=\"" +
                      fill + "\" stroke=\"none\"/>");
}

void SvgFigure::add_line(const std::string& id, const Vector& xs,
                         const Vector& ys, const std::string& stroke) {
  std::string d;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    d += (i == 0 ? "M" : "L");
    d += fmt(map_x(xs[i])) + " " + fmt(map_y(ys[i])) + " ";
  }
  elements_.push_back("<path id=\"" + id + "\" d=\"" + d +
                      "\" fill=\"none\" stroke=\"" + stroke +
                      "\" stroke-width=\"1.5\"/>");
}

void SvgFigure::add_points(const std::string& id, const Vector& xs,
                           const Vector& ys,
                           const std::vector<int>& color_index) {
  std::string g = "<g id=\"" + id + "\">";
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const char* color = "#000000";
    if (!color_index.empty()) {
      const int idx = color_index[static_cast<std::size_t>(i)];
      color = kPalette[static_cast<std::size_t>(idx) %
                       (sizeof(kPalette) / sizeof(kPalette[0]))];
    }
    g += "<circle cx=\"" + fmt(map_x(xs[i])) + "\" cy=\"" +
         fmt(map_y(ys[i])) + "\" r=\"3\" fill=\"" + color + "\"/>";
  }
  g += "</g>";
  elements_.push_back(std::move(g));
}

std::string SvgFigure::render() const {
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         fmt(width_) + " " + fmt(height_) + "\">\n";
  out += "<rect width=\"" + fmt(width_) + "\" height=\"" + fmt(height_) +
         "\" fill=\"#ffffff\"/>\n";

  // Axes with four ticks per side; labels use display rounding only.
  const double x0 = kMarginLeft, x1 = width_ - kMarginRight;
  const double y0 = height_ - kMarginBottom, y1 = kMarginTop;
  out += "<g id=\"axes\" stroke=\"#444444\" stroke-width=\"1\">";
  out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" +
         fmt(x1) + "\" y2=\"" + fmt(y0) + "\"/>";
  out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" +
         fmt(x0) + "\" y2=\"" + fmt(y1) + "\"/>";
  out += "</g>\n<g id=\"ticks\" font-size=\"11\" fill=\"#444444\">";
  for (int t = 0; t <= 3; ++t) {
    const double fx = x_min_ + (x_max_ - x_min_) * t / 3.0;
    const double fy = y_min_ + (y_max_ - y_min_) * t / 3.0;
    out += "<text x=\"" + fmt(map_x(fx)) + "\" y=\"" + fmt(y0 + 16.0) +
           "\" text-anchor=\"middle\">" + fmt_label(fx) + "</text>";
    out += "<text x=\"" + fmt(x0 - 6.0) + "\" y=\"" + fmt(map_y(fy) + 4.0) +
           "\" text-anchor=\"end\">" + fmt_label(fy) + "</text>";
  }
  out += "</g>\n";

  for (const std::string& el : elements_) {
    out += el;
    out += '\n';
  }
  out += "</svg>\n";
  return out;
}

}  // namespace gp
