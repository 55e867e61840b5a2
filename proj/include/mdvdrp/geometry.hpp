#pragma once

#include <algorithm>
#include <cmath>
#include <random>

namespace mdvdrp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

/// Axis-aligned rectangle. Zero width or height is allowed and describes an edge segment.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double longer_side() const { return std::max(width(), height()); }
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }

  bool contains(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }

  Point clamp(Point p) const { return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)}; }

  template <typename Rng>
  Point sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a = u(rng);
    const double b = u(rng);
    // Keep samples inside the closed rectangle even after rounding.
    return clamp({x0 + a * width(), y0 + b * height()});
  }
};

}  // namespace mdvdrp
