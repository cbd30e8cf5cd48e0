#ifndef GP_SVG_HPP
#define GP_SVG_HPP

#include <string>
#include <vector>

#include "gp/numerics.hpp"

namespace gp {

/// Minimal standalone SVG chart writer. Series are added in paint order;
/// each carries a stable element id so tests can locate it structurally.
class SvgFigure {
 public:
  SvgFigure(double width = 640.0, double height = 480.0);

  /// Data ranges; expanded by 5% padding on each side.
  void set_ranges(double x_min, double x_max, double y_min, double y_max);

  /// Shaded region between two curves, emitted as one closed <path>.
  void add_band(const std::string& id, const Vector& xs, const Vector& lo,
                const Vector& hi, const std::string& fill);

  /// Polyline <path>.
  void add_line(const std::string& id, const Vector& xs, const Vector& ys,
                const std::string& stroke);

  /// Circle markers inside a <g>; `color_index` (optional, may be empty)
  /// selects per-point colors from a fixed palette.
  void add_points(const std::string& id, const Vector& xs, const Vector& ys,
                  const std::vector<int>& color_index = {});

  std::string render() const;

 private:
  double map_x(double x) const;
  double map_y(double y) const;

  double width_, height_;
  double x_min_ = 0.0, x_max_ = 1.0, y_min_ = 0.0, y_max_ = 1.0;
  std::vector<std::string> elements_;
};

}  // namespace gp

#endif  // GP_SVG_HPP
