#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wavectrl/geometry.hpp"
#include "wavectrl/mesh.hpp"
#include "wavectrl/quadrature.hpp"

namespace wavectrl {

using ScalarField = std::function<double(const Point&)>;

/// Lagrange P_p element on the reference triangle, p = 1..3, equispaced nodes.
///
/// Basis functions are stored as coefficient columns over the monomials
/// r^i s^j (i + j <= p), obtained by inverting the nodal Vandermonde matrix.
class ReferenceElement {
 public:
  explicit ReferenceElement(int order);

  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

  [[nodiscard]] Eigen::VectorXd values(const Eigen::Vector2d& r) const;
  /// Row k holds (d/dr, d/ds) of basis k.
  [[nodiscard]] Eigen::MatrixX2d gradients(const Eigen::Vector2d& r) const;
  /// Row k holds (d2/dr2, d2/drds, d2/ds2) of basis k.
  [[nodiscard]] Eigen::MatrixX3d hessians(const Eigen::Vector2d& r) const;

 private:
  int order_;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // monomial x basis
};

ReferenceElement make_reference_element(int order);

/// Basis data at the points of one quadrature rule, in reference coordinates.
struct Tabulation {
  std::vector<Eigen::VectorXd> values;
  std::vector<Eigen::MatrixX2d> gradients;
  std::vector<Eigen::MatrixX3d> hessians;
};

Tabulation tabulate(const ReferenceElement& element, const std::vector<Eigen::Vector2d>& ref_points);

/// Physical derivatives of all basis functions of one cell at a set of points.
/// Derivative index 0 is t, index 1 is x.
struct BasisAtPoints {
  Eigen::MatrixXd value;  // points x basis
  Eigen::MatrixXd d_t;
  Eigen::MatrixXd d_x;
  Eigen::MatrixXd d_tt;
  Eigen::MatrixXd d_tx;
  Eigen::MatrixXd d_xx;
};

BasisAtPoints push_forward(const Tabulation& tab, const AffineMap& map);
BasisAtPoints basis_at(const ReferenceElement& element, const AffineMap& map,
                       const std::vector<Point>& physical_points);

/// Continuous Lagrange space on a mesh. With the lateral constraint, degrees
/// of freedom on x = 0 and x = 1 are removed and cell maps carry -1 there.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, int order, bool lateral_constraint);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] int order() const { return element_.order(); }
  [[nodiscard]] const ReferenceElement& element() const { return element_; }
  [[nodiscard]] bool lateral_constraint() const { return lateral_constraint_; }

  [[nodiscard]] int num_dofs() const { return static_cast<int>(coords_.size()); }
  [[nodiscard]] const Point& dof_coord(int dof) const { return coords_[static_cast<std::size_t>(dof)]; }
  [[nodiscard]] std::span<const int> cell_dofs(int cell) const {
    const auto n = static_cast<std::size_t>(element_.size());
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * n, n};
  }
  [[nodiscard]] const std::vector<int>& side_dofs(BoundarySide side) const {
    return side_dofs_[static_cast<std::size_t>(side)];
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  ReferenceElement element_;
  bool lateral_constraint_;
  std::vector<Point> coords_;
  std::vector<int> cell_dofs_;
  std::array<std::vector<int>, 4> side_dofs_;
};

/// Continuous P_p dimension V + (p-1)E + (p-1)(p-2)/2 F, before constraints.
int lagrange_dimension(const Mesh& mesh, int order);

struct CellEval {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();   // (d_t, d_x)
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

CellEval eval_on_cell(const FeSpace& space, int cell, const Eigen::VectorXd& coeffs,
                      const Eigen::Vector2d& ref_point);

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& f);

}  // namespace wavectrl
