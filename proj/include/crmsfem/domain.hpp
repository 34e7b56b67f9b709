#pragma once

namespace crmsfem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangular box [xmin, xmax] x [ymin, ymax].
struct Domain2D {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool valid() const { return xmax > xmin && ymax > ymin; }
  bool operator==(const Domain2D&) const = default;

  static Domain2D unit_square() { return {0.0, 1.0, 0.0, 1.0}; }
  static Domain2D centered_square() { return {-1.0, 1.0, -1.0, 1.0}; }
};

/// Sides of the outer boundary, in counterclockwise order starting at the bottom.
enum class Side { Bottom = 0, Right = 1, Top = 2, Left = 3 };

}  // namespace crmsfem
