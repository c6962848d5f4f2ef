#pragma once

#include <vector>

#include <Eigen/Core>

namespace wavectrl {

enum class QuadratureDomain { Segment, Triangle };

/// Points and weights on the reference segment [0,1] or the reference
/// triangle {(r,s) : r,s >= 0, r+s <= 1}. Segment points use column 0 only.
struct QuadratureRule {
  QuadratureDomain domain = QuadratureDomain::Triangle;
  int degree = 0;
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;

  [[nodiscard]] int size() const { return static_cast<int>(weights.size()); }
};

inline constexpr int kMaxQuadratureDegree = 20;

/// Gauss nodes/weights on [-1,1] for the Jacobi weight (1-s)^alpha (1+s)^beta.
void gauss_jacobi(int n, double alpha, double beta, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

QuadratureRule segment_quadrature(int degree);

/// Collapsed (Duffy) Gauss product rule, exact for total degree `degree`.
QuadratureRule triangle_quadrature(int degree);

}  // namespace wavectrl
