#pragma once

#include <cmath>
#include <span>

namespace shsim {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

// Axis-aligned rectangle in plan coordinates (meters). Containment is
// inclusive on every edge.
struct Rect {
  Point2 min;
  Point2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }

  bool is_proper() const {
    return std::isfinite(min.x) && std::isfinite(min.y) && std::isfinite(max.x) &&
           std::isfinite(max.y) && width() > 0.0 && height() > 0.0;
  }

  bool contains(Point2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }

  bool operator==(const Rect&) const = default;
};

bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2);

/// True for a closed polygon with >= 3 vertices, no zero-length edges, and no
/// pair of edges touching other than adjacent edges at their shared vertex.
bool is_simple_polygon(std::span<const Point2> vertices);

}  // namespace shsim
