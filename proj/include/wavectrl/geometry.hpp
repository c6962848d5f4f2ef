#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "wavectrl/mesh.hpp"

namespace wavectrl {

/// X = origin + J * r maps the reference triangle onto a mesh triangle.
struct AffineMap {
  Point origin = Point::Zero();
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d inverse = Eigen::Matrix2d::Identity();
  double det = 1.0;

  explicit AffineMap(const std::array<Point, 3>& corners);
  AffineMap(const Mesh& mesh, int cell) : AffineMap(mesh.corners(cell)) {}

  [[nodiscard]] Point to_physical(const Eigen::Vector2d& ref) const { return origin + jacobian * ref; }
  [[nodiscard]] Eigen::Vector2d to_reference(const Point& x) const { return inverse * (x - origin); }
};

/// Reference-space gradient to physical gradient: J^{-T} g.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> push_gradient(const Eigen::Matrix2d& inverse,
                                                            const Eigen::MatrixBase<Derived>& ref_grad) {
  return inverse.transpose().cast<typename Derived::Scalar>() * ref_grad;
}

/// Reference-space Hessian to physical Hessian: J^{-T} H J^{-1}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 2> push_hessian(const Eigen::Matrix2d& inverse,
                                                           const Eigen::MatrixBase<Derived>& ref_hess) {
  const auto inv = inverse.cast<typename Derived::Scalar>();
  return inv.transpose() * ref_hess * inv;
}

/// Straight line {X : normal . X = offset}.
struct Line {
  Point normal;
  double offset = 0.0;

  [[nodiscard]] double side(const Point& p) const { return normal.dot(p) - offset; }

  static Line t_equals(double t) { return {Point(1.0, 0.0), t}; }
  static Line x_equals(double x) { return {Point(0.0, 1.0), x}; }
  static Line x_plus_t(double c) { return {Point(1.0, 1.0), c}; }
  static Line x_minus_t(double c) { return {Point(-1.0, 1.0), c}; }
};

/// Cuts a triangle along every line that crosses its interior and returns a
/// triangulation of the pieces. Without crossings the input is returned.
std::vector<std::array<Point, 3>> split_triangle(const std::array<Point, 3>& triangle,
                                                 const std::vector<Line>& lines);

/// Sorted breakpoints of [a, b] including the interior cuts.
std::vector<double> split_interval(double a, double b, const std::vector<double>& cuts);

}  // namespace wavectrl
