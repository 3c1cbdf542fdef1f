#include "shsim/geometry.hpp"

#include <cstddef>

namespace shsim {

namespace {

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

// c collinear with a-b: does it lie on the closed segment?
bool on_segment(Point2 a, Point2 b, Point2 c) {
  return c.x >= std::fmin(a.x, b.x) && c.x <= std::fmax(a.x, b.x) && c.y >= std::fmin(a.y, b.y) &&
         c.y <= std::fmax(a.y, b.y);
}

}  // namespace

bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a1, a2, b1)) return true;
  if (o2 == 0 && on_segment(a1, a2, b2)) return true;
  if (o3 == 0 && on_segment(b1, b2, a1)) return true;
  if (o4 == 0 && on_segment(b1, b2, a2)) return true;
  return false;
}

bool is_simple_polygon(std::span<const Point2> v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == v[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a1 = v[i];
    const Point2 a2 = v[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 b1 = v[j];
      const Point2 b2 = v[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges share one vertex; they may only fold back onto
        // each other when collinear.
        const Point2 shared = (j == i + 1) ? a2 : a1;
        const Point2 other_a = (j == i + 1) ? a1 : a2;
        const Point2 other_b = (j == i + 1) ? b2 : b1;
        if (orientation(other_a, shared, other_b) == 0) {
          const double dot = (other_a.x - shared.x) * (other_b.x - shared.x) +
                             (other_a.y - shared.y) * (other_b.y - shared.y);
          if (dot > 0.0) return false;
        }
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2)) return false;
    }
  }
  return true;
}

}  // namespace shsim
