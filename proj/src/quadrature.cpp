#include "wavectrl/quadrature.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "wavectrl/error.hpp"

namespace wavectrl {

void gauss_jacobi(int n, double alpha, double beta, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  WAVECTRL_REQUIRE(n >= 1, "gauss_jacobi: need at least one node");
  // Golub-Welsch on the symmetric Jacobi matrix.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double two_k = 2.0 * k + ab;
    jac(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0)
                         : (beta * beta - alpha * alpha) / (two_k * (two_k + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double tm = 2.0 * m + ab;
      const double num = 4.0 * m * (m + alpha) * (m + beta) * (m + ab);
      const double den = tm * tm * (tm + 1.0) * (tm - 1.0);
      jac(k, k + 1) = jac(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                     std::tgamma(ab + 2.0);
  nodes = eig.eigenvalues();
  weights = mu0 * eig.eigenvectors().row(0).transpose().array().square();
}

QuadratureRule segment_quadrature(int degree) {
  WAVECTRL_REQUIRE(degree >= 1 && degree <= kMaxQuadratureDegree,
                   "segment_quadrature: degree " + std::to_string(degree) + " not tabulated");
  const int n = (degree + 2) / 2;
  Eigen::VectorXd s;
  Eigen::VectorXd w;
  gauss_jacobi(n, 0.0, 0.0, s, w);
  QuadratureRule rule{QuadratureDomain::Segment, degree, {}, {}};
  for (int i = 0; i < n; ++i) {
    rule.points.emplace_back(0.5 * (s(i) + 1.0), 0.0);
    rule.weights.push_back(0.5 * w(i));
  }
  return rule;
}

QuadratureRule triangle_quadrature(int degree) {
  WAVECTRL_REQUIRE(degree >= 1 && degree <= kMaxQuadratureDegree,
                   "triangle_quadrature: degree " + std::to_string(degree) + " not tabulated");
  const int n = (degree + 2) / 2;
  Eigen::VectorXd su;
  Eigen::VectorXd wu;
  Eigen::VectorXd sv;
  Eigen::VectorXd wv;
  gauss_jacobi(n, 0.0, 0.0, su, wu);
  gauss_jacobi(n, 1.0, 0.0, sv, wv);  // absorbs the (1 - v) Jacobian
  QuadratureRule rule{QuadratureDomain::Triangle, degree, {}, {}};
  for (int j = 0; j < n; ++j) {
    const double v = 0.5 * (sv(j) + 1.0);
    for (int i = 0; i < n; ++i) {
      const double u = 0.5 * (su(i) + 1.0);
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(0.125 * wu(i) * wv(j));
    }
  }
  return rule;
}

}  // namespace wavectrl
