#include "wavectrl/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace wavectrl {

AffineMap::AffineMap(const std::array<Point, 3>& corners) : origin(corners[0]) {
  jacobian.col(0) = corners[1] - corners[0];
  jacobian.col(1) = corners[2] - corners[0];
  det = jacobian.determinant();
  inverse = jacobian.inverse();
}

namespace {

using Polygon = std::vector<Point>;

// Sutherland-Hodgman against one half plane; sign = +1 keeps side >= 0.
Polygon clip(const Polygon& poly, const Line& line, double sign) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const double da = sign * line.side(a);
    const double db = sign * line.side(b);
    if (da >= 0.0) out.push_back(a);
    if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
      const double s = da / (da - db);
      out.push_back(a + s * (b - a));
    }
  }
  return out;
}

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p(0) * q(1) - p(1) * q(0);
  }
  return 0.5 * a;
}

}  // namespace

std::vector<std::array<Point, 3>> split_triangle(const std::array<Point, 3>& triangle,
                                                 const std::vector<Line>& lines) {
  const double ref_area = std::abs(polygon_area({triangle[0], triangle[1], triangle[2]}));
  const double scale = std::max({(triangle[1] - triangle[0]).norm(), (triangle[2] - triangle[0]).norm(),
                                 (triangle[2] - triangle[1]).norm()});
  std::vector<Polygon> pieces{{triangle[0], triangle[1], triangle[2]}};
  for (const Line& line : lines) {
    const double tol = 1e-12 * scale * line.normal.norm();
    std::vector<Polygon> next;
    for (const Polygon& poly : pieces) {
      bool pos = false;
      bool neg = false;
      for (const Point& p : poly) {
        const double s = line.side(p);
        pos = pos || s > tol;
        neg = neg || s < -tol;
      }
      if (!(pos && neg)) {
        next.push_back(poly);
        continue;
      }
      for (double sign : {1.0, -1.0}) {
        Polygon part = clip(poly, line, sign);
        if (part.size() >= 3 && std::abs(polygon_area(part)) > 1e-14 * ref_area) next.push_back(std::move(part));
      }
    }
    pieces = std::move(next);
  }
  std::vector<std::array<Point, 3>> out;
  for (const Polygon& poly : pieces) {
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) out.push_back({poly[0], poly[i], poly[i + 1]});
  }
  return out;
}

std::vector<double> split_interval(double a, double b, const std::vector<double>& cuts) {
  std::vector<double> out{a};
  for (double c : cuts) {
    if (c > a + 1e-14 && c < b - 1e-14) out.push_back(c);
  }
  out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace wavectrl
