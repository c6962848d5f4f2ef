#include "wavectrl/fem.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include <Eigen/LU>

#include "wavectrl/error.hpp"

namespace wavectrl {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// d^k/dx^k x^n evaluated at x
double dpow(double x, int n, int k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= n - i;
  return c * ipow(x, n - k);
}

}  // namespace

ReferenceElement::ReferenceElement(int order) : order_(order) {
  WAVECTRL_REQUIRE(order >= 1 && order <= 3, "reference element: unsupported order " + std::to_string(order));
  const double p = order;
  nodes_ = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  for (int j = 0; j <= order; ++j) {
    for (int i = 0; i + j <= order; ++i) {
      const bool vertex = (i == 0 && j == 0) || (i == order && j == 0) || (i == 0 && j == order);
      if (!vertex) nodes_.emplace_back(i / p, j / p);
    }
  }
  for (int d = 0; d <= order; ++d) {
    for (int j = 0; j <= d; ++j) exponents_.push_back({d - j, j});
  }
  const int n = size();
  Eigen::MatrixXd vandermonde(n, n);
  for (int a = 0; a < n; ++a) {
    for (int m = 0; m < n; ++m) {
      vandermonde(a, m) = ipow(nodes_[static_cast<std::size_t>(a)](0), exponents_[static_cast<std::size_t>(m)][0]) *
                          ipow(nodes_[static_cast<std::size_t>(a)](1), exponents_[static_cast<std::size_t>(m)][1]);
    }
  }
  // V C = I  =>  basis k takes value delta_ak at node a
  coeffs_ = vandermonde.fullPivLu().solve(Eigen::MatrixXd::Identity(n, n));
}

Eigen::VectorXd ReferenceElement::values(const Eigen::Vector2d& r) const {
  Eigen::RowVectorXd mono(coeffs_.rows());
  for (int m = 0; m < mono.size(); ++m) {
    const auto& e = exponents_[static_cast<std::size_t>(m)];
    mono(m) = ipow(r(0), e[0]) * ipow(r(1), e[1]);
  }
  return (mono * coeffs_).transpose();
}

Eigen::MatrixX2d ReferenceElement::gradients(const Eigen::Vector2d& r) const {
  Eigen::MatrixX2d mono(coeffs_.rows(), 2);
  for (int m = 0; m < mono.rows(); ++m) {
    const auto& e = exponents_[static_cast<std::size_t>(m)];
    mono(m, 0) = dpow(r(0), e[0], 1) * ipow(r(1), e[1]);
    mono(m, 1) = ipow(r(0), e[0]) * dpow(r(1), e[1], 1);
  }
  return coeffs_.transpose() * mono;
}

Eigen::MatrixX3d ReferenceElement::hessians(const Eigen::Vector2d& r) const {
  Eigen::MatrixX3d mono(coeffs_.rows(), 3);
  for (int m = 0; m < mono.rows(); ++m) {
    const auto& e = exponents_[static_cast<std::size_t>(m)];
    mono(m, 0) = dpow(r(0), e[0], 2) * ipow(r(1), e[1]);
    mono(m, 1) = dpow(r(0), e[0], 1) * dpow(r(1), e[1], 1);
    mono(m, 2) = ipow(r(0), e[0]) * dpow(r(1), e[1], 2);
  }
  return coeffs_.transpose() * mono;
}

ReferenceElement make_reference_element(int order) { return ReferenceElement(order); }

Tabulation tabulate(const ReferenceElement& element, const std::vector<Eigen::Vector2d>& ref_points) {
  Tabulation tab;
  for (const auto& r : ref_points) {
    tab.values.push_back(element.values(r));
    tab.gradients.push_back(element.gradients(r));
    tab.hessians.push_back(element.hessians(r));
  }
  return tab;
}

BasisAtPoints push_forward(const Tabulation& tab, const AffineMap& map) {
  const auto nq = static_cast<Eigen::Index>(tab.values.size());
  const Eigen::Index n = nq > 0 ? tab.values.front().size() : 0;
  BasisAtPoints b{Eigen::MatrixXd(nq, n), Eigen::MatrixXd(nq, n), Eigen::MatrixXd(nq, n),
                  Eigen::MatrixXd(nq, n), Eigen::MatrixXd(nq, n), Eigen::MatrixXd(nq, n)};
  const Eigen::Matrix2d& inv = map.inverse;
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    b.value.row(q) = tab.values[qi].transpose();
    // physical gradient = J^{-T} g, applied to all basis rows at once
    const Eigen::MatrixX2d grad = tab.gradients[qi] * inv;
    b.d_t.row(q) = grad.col(0).transpose();
    b.d_x.row(q) = grad.col(1).transpose();
    const Eigen::MatrixX3d& hr = tab.hessians[qi];
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Matrix2d h;
      h << hr(k, 0), hr(k, 1), hr(k, 1), hr(k, 2);
      const Eigen::Matrix2d hp = push_hessian(inv, h);
      b.d_tt(q, k) = hp(0, 0);
      b.d_tx(q, k) = hp(0, 1);
      b.d_xx(q, k) = hp(1, 1);
    }
  }
  return b;
}

BasisAtPoints basis_at(const ReferenceElement& element, const AffineMap& map,
                       const std::vector<Point>& physical_points) {
  std::vector<Eigen::Vector2d> refs;
  refs.reserve(physical_points.size());
  for (const auto& x : physical_points) refs.push_back(map.to_reference(x));
  return push_forward(tabulate(element, refs), map);
}

int lagrange_dimension(const Mesh& mesh, int order) {
  return mesh.num_vertices() + (order - 1) * mesh.num_edges() +
         (order - 1) * (order - 2) / 2 * mesh.num_triangles();
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int order, bool lateral_constraint)
    : mesh_(std::move(mesh)), element_(order), lateral_constraint_(lateral_constraint) {
  WAVECTRL_REQUIRE(mesh_ != nullptr, "FeSpace: null mesh");
  const double tol = 1e-10 * mesh_->h();
  const double final_time = mesh_->final_time();
  const int n = element_.size();

  struct KeyHash {
    std::size_t operator()(const std::pair<long long, long long>& k) const {
      return std::hash<long long>()(k.first * 1000003LL) ^ std::hash<long long>()(k.second);
    }
  };
  std::unordered_map<std::pair<long long, long long>, int, KeyHash> lookup;
  lookup.reserve(static_cast<std::size_t>(lagrange_dimension(*mesh_, order)) * 2);

  // tolerance buckets, neighbours checked so points near a bucket edge still merge
  const auto find_or_insert = [&](const Point& x) -> int {
    const long long kt = std::llround(x(0) / tol);
    const long long kx = std::llround(x(1) / tol);
    for (long long dt = -1; dt <= 1; ++dt) {
      for (long long dx = -1; dx <= 1; ++dx) {
        auto it = lookup.find({kt + dt, kx + dx});
        if (it != lookup.end()) return it->second;
      }
    }
    const int id = static_cast<int>(lookup.size());
    lookup.emplace(std::make_pair(kt, kx), id);
    return id;
  };

  std::vector<int> raw(static_cast<std::size_t>(mesh_->num_triangles()) * static_cast<std::size_t>(n));
  std::vector<Point> raw_coords;
  for (int c = 0; c < mesh_->num_triangles(); ++c) {
    const AffineMap map(*mesh_, c);
    for (int a = 0; a < n; ++a) {
      const Point x = map.to_physical(element_.nodes()[static_cast<std::size_t>(a)]);
      const int id = find_or_insert(x);
      if (id == static_cast<int>(raw_coords.size())) raw_coords.push_back(x);
      raw[static_cast<std::size_t>(c) * static_cast<std::size_t>(n) + static_cast<std::size_t>(a)] = id;
    }
  }

  std::vector<int> renumber(raw_coords.size(), -1);
  for (std::size_t i = 0; i < raw_coords.size(); ++i) {
    const Point& x = raw_coords[i];
    const bool lateral = std::abs(x(1)) <= tol || std::abs(x(1) - 1.0) <= tol;
    if (lateral_constraint_ && lateral) continue;
    renumber[i] = static_cast<int>(coords_.size());
    coords_.push_back(x);
    const int dof = renumber[i];
    if (std::abs(x(0)) <= tol) side_dofs_[static_cast<std::size_t>(BoundarySide::Bottom)].push_back(dof);
    if (std::abs(x(0) - final_time) <= tol) side_dofs_[static_cast<std::size_t>(BoundarySide::Top)].push_back(dof);
    if (std::abs(x(1)) <= tol) side_dofs_[static_cast<std::size_t>(BoundarySide::Left)].push_back(dof);
    if (std::abs(x(1) - 1.0) <= tol) side_dofs_[static_cast<std::size_t>(BoundarySide::Right)].push_back(dof);
  }
  cell_dofs_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) cell_dofs_[i] = renumber[static_cast<std::size_t>(raw[i])];
}

CellEval eval_on_cell(const FeSpace& space, int cell, const Eigen::VectorXd& coeffs,
                      const Eigen::Vector2d& ref_point) {
  WAVECTRL_REQUIRE(cell >= 0 && cell < space.mesh().num_triangles(), "eval_on_cell: cell out of range");
  WAVECTRL_REQUIRE(coeffs.size() == space.num_dofs(), "eval_on_cell: coefficient vector has wrong length");
  const AffineMap map(space.mesh(), cell);
  const auto& el = space.element();
  const Eigen::VectorXd v = el.values(ref_point);
  const Eigen::MatrixX2d g = el.gradients(ref_point);
  const Eigen::MatrixX3d hs = el.hessians(ref_point);
  CellEval out;
  Eigen::Vector2d gref = Eigen::Vector2d::Zero();
  Eigen::Matrix2d href = Eigen::Matrix2d::Zero();
  const auto dofs = space.cell_dofs(cell);
  for (int k = 0; k < el.size(); ++k) {
    const int dof = dofs[static_cast<std::size_t>(k)];
    if (dof < 0) continue;
    const double c = coeffs(dof);
    out.value += c * v(k);
    gref += c * g.row(k).transpose();
    href(0, 0) += c * hs(k, 0);
    href(0, 1) += c * hs(k, 1);
    href(1, 1) += c * hs(k, 2);
  }
  href(1, 0) = href(0, 1);
  out.gradient = push_gradient(map.inverse, gref);
  out.hessian = push_hessian(map.inverse, href);
  return out;
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& f) {
  Eigen::VectorXd out(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i) {
    const double v = f(space.dof_coord(i));
    WAVECTRL_REQUIRE(std::isfinite(v), "interpolate: non-finite sample");
    out(i) = v;
  }
  return out;
}

}  // namespace wavectrl
