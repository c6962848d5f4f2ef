#include "wavectrl/forms.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wavectrl/error.hpp"

namespace wavectrl {

namespace {

using Triplet = Eigen::Triplet<double>;

class TripletSink {
 public:
  void add(std::span<const int> rows, std::span<const int> cols, const Eigen::MatrixXd& local) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0) continue;
      for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] < 0) continue;
        const double v = local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v != 0.0) data_.emplace_back(rows[i], cols[j], v);
      }
    }
  }

  SparseMatrix build(int nrows, int ncols) const {
    SparseMatrix m(nrows, ncols);
    m.setFromTriplets(data_.begin(), data_.end());
    m.makeCompressed();
    return m;
  }

 private:
  std::vector<Triplet> data_;
};

void require_same_mesh(const FeSpace& a, const FeSpace& b) {
  WAVECTRL_REQUIRE(&a.mesh() == &b.mesh(), "forms: trial and test spaces live on different meshes");
}

bool has_potential(const Potential& v) { return static_cast<bool>(v); }

Eigen::VectorXd potential_at(const Potential& v, const std::vector<Point>& xs) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xs.size()));
  if (!v) return out;
  for (std::size_t i = 0; i < xs.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(xs[i]);
  return out;
}

struct PointSet {
  std::vector<Point> x;
  Eigen::VectorXd w;
};

/// Loop over cells with quadrature on each cell, or on its pieces when a
/// break line crosses it. kernel(rows_basis, cols_basis, points) -> local.
template <typename Kernel>
SparseMatrix assemble_cells(const FeSpace& rows, const FeSpace& cols, int degree, const std::vector<Line>& breaks,
                            Kernel&& kernel) {
  require_same_mesh(rows, cols);
  const Mesh& mesh = rows.mesh();
  const QuadratureRule rule = triangle_quadrature(std::min(degree, kMaxQuadratureDegree));
  const Tabulation tab_r = tabulate(rows.element(), rule.points);
  const Tabulation tab_c = tabulate(cols.element(), rule.points);
  TripletSink sink;
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const AffineMap map(mesh, c);
    const auto corners = mesh.corners(c);
    const auto pieces = breaks.empty() ? std::vector<std::array<Point, 3>>{corners} : split_triangle(corners, breaks);
    PointSet pts;
    BasisAtPoints br;
    BasisAtPoints bc;
    if (pieces.size() == 1) {
      pts.w.resize(rule.size());
      for (int q = 0; q < rule.size(); ++q) {
        pts.x.push_back(map.to_physical(rule.points[static_cast<std::size_t>(q)]));
        pts.w(q) = rule.weights[static_cast<std::size_t>(q)] * std::abs(map.det);
      }
      br = push_forward(tab_r, map);
      bc = push_forward(tab_c, map);
    } else {
      std::vector<double> w;
      for (const auto& piece : pieces) {
        const AffineMap sub(piece);
        for (int q = 0; q < rule.size(); ++q) {
          pts.x.push_back(sub.to_physical(rule.points[static_cast<std::size_t>(q)]));
          w.push_back(rule.weights[static_cast<std::size_t>(q)] * std::abs(sub.det));
        }
      }
      pts.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      br = basis_at(rows.element(), map, pts.x);
      bc = basis_at(cols.element(), map, pts.x);
    }
    sink.add(rows.cell_dofs(c), cols.cell_dofs(c), kernel(br, bc, pts));
  }
  return sink.build(rows.num_dofs(), cols.num_dofs());
}

/// Quadrature points on a mesh edge, split where the varying coordinate
/// crosses one of the cut values.
PointSet edge_points(const Mesh& mesh, int edge, int degree, const std::vector<double>& t_cuts,
                     const std::vector<double>& x_cuts) {
  const QuadratureRule rule = segment_quadrature(std::min(degree, kMaxQuadratureDegree));
  const Edge& e = mesh.edges()[static_cast<std::size_t>(edge)];
  const Point& a = mesh.vertex(e.vertices[0]);
  const Point& b = mesh.vertex(e.vertices[1]);
  std::vector<double> s_cuts;
  const auto add_cuts = [&](int coord, const std::vector<double>& cuts) {
    const double d = b(coord) - a(coord);
    if (std::abs(d) < 1e-14) return;
    for (double c : cuts) s_cuts.push_back((c - a(coord)) / d);
  };
  add_cuts(0, t_cuts);
  add_cuts(1, x_cuts);
  const std::vector<double> s = split_interval(0.0, 1.0, s_cuts);
  const double length = (b - a).norm();
  PointSet pts;
  std::vector<double> w;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double span = s[k + 1] - s[k];
    for (int q = 0; q < rule.size(); ++q) {
      const double sq = s[k] + span * rule.points[static_cast<std::size_t>(q)](0);
      pts.x.push_back(a + sq * (b - a));
      w.push_back(rule.weights[static_cast<std::size_t>(q)] * span * length);
    }
  }
  pts.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return pts;
}

/// Minkowski conormal derivative -N_t d_t + N_x d_x of every basis function.
Eigen::MatrixXd conormal(const BasisAtPoints& b, const Point& normal) {
  return -normal(0) * b.d_t + normal(1) * b.d_x;
}

/// Loop over boundary edges of the given sides. kernel(side, rows_basis,
/// cols_basis, points, outward_normal) -> local.
template <typename Kernel>
SparseMatrix assemble_sides(const FeSpace& rows, const FeSpace& cols, std::initializer_list<BoundarySide> sides,
                            int degree, Kernel&& kernel) {
  require_same_mesh(rows, cols);
  const Mesh& mesh = rows.mesh();
  TripletSink sink;
  for (BoundarySide side : sides) {
    for (int e : mesh.boundary_edges(side)) {
      const FacePair fp = mesh.face_pair(e);
      const PointSet pts = edge_points(mesh, e, degree, {}, {});
      const AffineMap map(mesh, fp.left);
      const BasisAtPoints br = basis_at(rows.element(), map, pts.x);
      const BasisAtPoints bc = basis_at(cols.element(), map, pts.x);
      sink.add(rows.cell_dofs(fp.left), cols.cell_dofs(fp.left), kernel(side, br, bc, pts, fp.normal));
    }
  }
  return sink.build(rows.num_dofs(), cols.num_dofs());
}

Eigen::MatrixXd weighted_product(const Eigen::MatrixXd& left, const Eigen::VectorXd& w, const Eigen::MatrixXd& right) {
  return left.transpose() * w.asDiagonal() * right;
}

constexpr std::initializer_list<BoundarySide> kAllSides = {BoundarySide::Bottom, BoundarySide::Top,
                                                           BoundarySide::Left, BoundarySide::Right};

}  // namespace

std::string_view to_string(FormName name) {
  switch (name) {
    case FormName::ADist: return "a_dist";
    case FormName::ABd: return "a_bd";
    case FormName::SVol: return "s_vol";
    case FormName::SJump: return "s_jump";
    case FormName::ESlice: return "e_slice";
    case FormName::CDist: return "c_dist";
    case FormName::CTildeDist: return "ctilde_dist";
    case FormName::RhoDist: return "rho_dist";
    case FormName::BGamma: return "b_gamma";
    case FormName::CBd: return "c_bd";
    case FormName::CTildeBd: return "ctilde_bd";
    case FormName::RhoBd: return "rho_bd";
  }
  return "?";
}

int volume_degree(int p, int q, bool nonpolynomial_weight) {
  return std::min(kMaxQuadratureDegree, std::max(1, p + q + (nonpolynomial_weight ? 6 : 0)));
}

int face_degree(int p, int q, bool nonpolynomial_weight) {
  return std::min(kMaxQuadratureDegree, std::max(1, p + q + (nonpolynomial_weight ? 4 : 0)));
}

// Calls fn(dofs, jump, pts) per interior edge; jump maps the 2n local
// coefficients of the left and right cells to [d_nu u] at the edge points.
template <class Fn>
void for_each_jump_face(const FeSpace& space, Fn&& fn) {
  const Mesh& mesh = space.mesh();
  const int n = space.element().size();
  const int deg = face_degree(space.order(), space.order(), false);
  std::vector<int> dofs(static_cast<std::size_t>(2 * n));
  for (int e : mesh.interior_edges()) {
    const FacePair fp = mesh.face_pair(e);
    const PointSet pts = edge_points(mesh, e, deg, {}, {});
    const BasisAtPoints bl = basis_at(space.element(), AffineMap(mesh, fp.left), pts.x);
    const BasisAtPoints br = basis_at(space.element(), AffineMap(mesh, fp.right), pts.x);
    Eigen::MatrixXd jump(static_cast<Eigen::Index>(pts.x.size()), 2 * n);
    jump.leftCols(n) = conormal(bl, fp.normal);
    jump.rightCols(n) = -conormal(br, fp.normal);
    const auto dl = space.cell_dofs(fp.left);
    const auto dr = space.cell_dofs(fp.right);
    std::copy(dl.begin(), dl.end(), dofs.begin());
    std::copy(dr.begin(), dr.end(), dofs.begin() + n);
    fn(dofs, jump, pts);
  }
}

FormMatrix assemble_a_dist(const FeSpace& trial, const FeSpace& test, double h) {
  const double h2 = h * h;
  const int deg = volume_degree(trial.order(), test.order(), false);
  SparseMatrix vol = assemble_cells(test, trial, deg, {}, [&](const BasisAtPoints& r, const BasisAtPoints& c,
                                                               const PointSet& pts) {
    return Eigen::MatrixXd(h2 * (weighted_product(r.d_x, pts.w, c.d_x) - weighted_product(r.d_t, pts.w, c.d_t)));
  });
  SparseMatrix bnd = assemble_sides(
      test, trial, {BoundarySide::Bottom, BoundarySide::Top}, face_degree(trial.order(), test.order(), false),
      [&](BoundarySide, const BasisAtPoints& r, const BasisAtPoints& c, const PointSet& pts, const Point& n) {
        return Eigen::MatrixXd(-h2 * weighted_product(conormal(r, n), pts.w, c.value));
      });
  return {FormName::ADist, vol + bnd, h};
}

StabilizerForms assemble_s(const FeSpace& space, double h, const Potential& potential) {
  const double h4 = std::pow(h, 4);
  const bool with_v = has_potential(potential);
  const int p = space.order();
  SparseMatrix vol;
  if (p == 1 && !with_v) {
    vol = SparseMatrix(space.num_dofs(), space.num_dofs());
  } else {
    vol = assemble_cells(space, space, volume_degree(p, p, with_v), {},
                         [&](const BasisAtPoints& r, const BasisAtPoints& c, const PointSet& pts) {
                           const Eigen::VectorXd v = potential_at(potential, pts.x);
                           const Eigen::MatrixXd pr = r.d_tt - r.d_xx + v.asDiagonal() * r.value;
                           const Eigen::MatrixXd pc = c.d_tt - c.d_xx + v.asDiagonal() * c.value;
                           return Eigen::MatrixXd(h4 * weighted_product(pr, pts.w, pc));
                         });
  }

  const double h3 = h * h * h;
  TripletSink sink;
  for_each_jump_face(space, [&](const std::vector<int>& dofs, const Eigen::MatrixXd& jump, const PointSet& pts) {
    sink.add(dofs, dofs, h3 * weighted_product(jump, pts.w, jump));
  });
  return {{FormName::SVol, std::move(vol), h},
          {FormName::SJump, sink.build(space.num_dofs(), space.num_dofs()), h}};
}

double jump_energy(const FeSpace& space, const Eigen::VectorXd& coeffs, double h) {
  WAVECTRL_REQUIRE(coeffs.size() == space.num_dofs(), "jump_energy: coefficient size mismatch");
  double sum = 0.0;
  for_each_jump_face(space, [&](const std::vector<int>& dofs, const Eigen::MatrixXd& jump, const PointSet& pts) {
    Eigen::VectorXd local(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) local(static_cast<Eigen::Index>(i)) = coeffs(dofs[i]);
    sum += pts.w.dot((jump * local).array().square().matrix());
  });
  return h * h * h * sum;
}

FormMatrix assemble_e_slice(const FeSpace& space, double h, BoundarySide slice) {
  WAVECTRL_REQUIRE(slice == BoundarySide::Bottom || slice == BoundarySide::Top,
                   "assemble_e_slice: slice must be bottom or top");
  WAVECTRL_REQUIRE(!space.mesh().boundary_edges(slice).empty(), "assemble_e_slice: slice has no edges");
  const double h3 = h * h * h;
  SparseMatrix m = assemble_sides(space, space, {slice}, face_degree(space.order(), space.order(), false),
                                  [&](BoundarySide, const BasisAtPoints& r, const BasisAtPoints& c,
                                      const PointSet& pts, const Point&) {
                                    return Eigen::MatrixXd(h * weighted_product(r.value, pts.w, c.value) +
                                                           h3 * weighted_product(r.d_t, pts.w, c.d_t));
                                  });
  return {FormName::ESlice, std::move(m), h};
}

namespace {

SparseMatrix weighted_mass(const FeSpace& rows, const FeSpace& cols, const Cutoff& cutoff, bool squared) {
  const int deg = volume_degree(rows.order(), cols.order(), cutoff.smooth_nonpolynomial());
  return assemble_cells(rows, cols, deg, cutoff.volume_breaks(),
                        [&](const BasisAtPoints& r, const BasisAtPoints& c, const PointSet& pts) {
                          Eigen::VectorXd w = pts.w;
                          for (Eigen::Index q = 0; q < w.size(); ++q) {
                            const double chi = cutoff(pts.x[static_cast<std::size_t>(q)]);
                            w(q) *= squared ? chi * chi : chi;
                          }
                          return Eigen::MatrixXd(weighted_product(r.value, w, c.value));
                        });
}

}  // namespace

FormMatrix assemble_c_dist(const FeSpace& trial, const FeSpace& test, double h, const Cutoff& cutoff) {
  return {FormName::CDist, weighted_mass(test, trial, cutoff, false), h};
}

FormMatrix assemble_ctilde_dist(const FeSpace& space, double h, const Cutoff& cutoff) {
  return {FormName::CTildeDist, weighted_mass(space, space, cutoff, true), h};
}

FormMatrix assemble_rho_dist(const FeSpace& u_space, const FeSpace& phi_space, double h, const Cutoff& cutoff) {
  const double h2 = h * h;
  if (u_space.order() == 1) {
    require_same_mesh(u_space, phi_space);
    return {FormName::RhoDist, SparseMatrix(u_space.num_dofs(), phi_space.num_dofs()), h};
  }
  const int deg = volume_degree(u_space.order(), phi_space.order(), cutoff.smooth_nonpolynomial());
  SparseMatrix m = assemble_cells(u_space, phi_space, deg, cutoff.volume_breaks(),
                                  [&](const BasisAtPoints& r, const BasisAtPoints& c, const PointSet& pts) {
                                    Eigen::VectorXd w = pts.w;
                                    for (Eigen::Index q = 0; q < w.size(); ++q) {
                                      w(q) *= cutoff(pts.x[static_cast<std::size_t>(q)]);
                                    }
                                    const Eigen::MatrixXd box = r.d_tt - r.d_xx;
                                    return Eigen::MatrixXd(-h2 * weighted_product(box, w, c.value));
                                  });
  return {FormName::RhoDist, std::move(m), h};
}

FormMatrix assemble_a_bd(const FeSpace& trial, const FeSpace& test, double h, const Potential& potential) {
  const double h2 = h * h;
  const bool with_v = has_potential(potential);
  const int deg = volume_degree(trial.order(), test.order(), with_v);
  SparseMatrix vol = assemble_cells(test, trial, deg, {}, [&](const BasisAtPoints& r, const BasisAtPoints& c,
                                                               const PointSet& pts) {
    const Eigen::VectorXd v = potential_at(potential, pts.x);
    return Eigen::MatrixXd(h2 * (weighted_product(r.d_x, pts.w, c.d_x) - weighted_product(r.d_t, pts.w, c.d_t) +
                                 weighted_product(r.value, pts.w.cwiseProduct(v), c.value)));
  });
  SparseMatrix bnd = assemble_sides(
      test, trial, kAllSides, face_degree(trial.order(), test.order(), false),
      [&](BoundarySide side, const BasisAtPoints& r, const BasisAtPoints& c, const PointSet& pts, const Point& n) {
        Eigen::MatrixXd local = -h2 * weighted_product(conormal(r, n), pts.w, c.value);
        if (side == BoundarySide::Left || side == BoundarySide::Right) {
          local -= h2 * weighted_product(r.value, pts.w, conormal(c, n));
        }
        return local;
      });
  return {FormName::ABd, vol + bnd, h};
}

FormMatrix assemble_b_gamma(const FeSpace& space, double h) {
  SparseMatrix m = assemble_sides(space, space, {BoundarySide::Left, BoundarySide::Right},
                                  face_degree(space.order(), space.order(), false),
                                  [&](BoundarySide, const BasisAtPoints& r, const BasisAtPoints& c,
                                      const PointSet& pts, const Point&) {
                                    return Eigen::MatrixXd(h * weighted_product(r.value, pts.w, c.value));
                                  });
  return {FormName::BGamma, std::move(m), h};
}

namespace {

Eigen::VectorXd gamma_weights(const Cutoff& cutoff, BoundarySide side, const PointSet& pts, bool squared) {
  Eigen::VectorXd w = pts.w;
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    const double chi = cutoff.on_boundary(pts.x[static_cast<std::size_t>(q)](0), side);
    w(q) *= squared ? chi * chi : chi;
  }
  return w;
}

SparseMatrix gamma_normal_mass(const FeSpace& space, double h, const Cutoff& cutoff, bool squared) {
  const double h3 = h * h * h;
  const int deg = face_degree(space.order(), space.order(), cutoff.smooth_nonpolynomial());
  return assemble_sides(space, space, {BoundarySide::Left, BoundarySide::Right}, deg,
                        [&](BoundarySide side, const BasisAtPoints& r, const BasisAtPoints& c, const PointSet& pts,
                            const Point& n) {
                          const Eigen::VectorXd w = gamma_weights(cutoff, side, pts, squared);
                          return Eigen::MatrixXd(h3 * weighted_product(conormal(r, n), w, conormal(c, n)));
                        });
}

}  // namespace

FormMatrix assemble_c_bd(const FeSpace& space, double h, const Cutoff& cutoff) {
  return {FormName::CBd, gamma_normal_mass(space, h, cutoff, false), h};
}

FormMatrix assemble_ctilde_bd(const FeSpace& space, double h, const Cutoff& cutoff) {
  return {FormName::CTildeBd, gamma_normal_mass(space, h, cutoff, true), h};
}

FormMatrix assemble_rho_bd(const FeSpace& u_space, const FeSpace& phi_space, double h, const Cutoff& cutoff) {
  const double h2 = h * h;
  const int deg = face_degree(u_space.order(), phi_space.order(), cutoff.smooth_nonpolynomial());
  SparseMatrix m = assemble_sides(u_space, phi_space, {BoundarySide::Left, BoundarySide::Right}, deg,
                                  [&](BoundarySide side, const BasisAtPoints& r, const BasisAtPoints& c,
                                      const PointSet& pts, const Point& n) {
                                    const Eigen::VectorXd w = gamma_weights(cutoff, side, pts, false);
                                    return Eigen::MatrixXd(-h2 * weighted_product(r.value, w, conormal(c, n)));
                                  });
  return {FormName::RhoBd, std::move(m), h};
}

BoundaryFormFamily assemble_boundary_family(const FeSpace& u_space, const FeSpace& phi_space, double h,
                                            const Cutoff& cutoff, const Potential& potential) {
  WAVECTRL_REQUIRE(!u_space.lateral_constraint() && !phi_space.lateral_constraint(),
                   "assemble_boundary_family: boundary control spaces carry no lateral constraint");
  return {assemble_a_bd(u_space, phi_space, h, potential),
          assemble_b_gamma(u_space, h),
          assemble_b_gamma(phi_space, h),
          assemble_c_bd(phi_space, h, cutoff),
          assemble_ctilde_bd(phi_space, h, cutoff),
          assemble_rho_bd(u_space, phi_space, h, cutoff)};
}

LoadVectors assemble_load(const FeSpace& u_space, const FeSpace& phi_space, double h, double kappa,
                          const InitialData& data) {
  require_same_mesh(u_space, phi_space);
  LoadVectors out{Eigen::VectorXd::Zero(u_space.num_dofs()), Eigen::VectorXd::Zero(phi_space.num_dofs())};
  if (data.is_zero()) return out;
  WAVECTRL_REQUIRE(data.u0 && data.u1, "assemble_load: initial data missing a profile");
  const Mesh& mesh = u_space.mesh();
  const double scale_v = std::pow(h, -kappa);
  const double h2 = h * h;
  const double h3 = h2 * h;
  const int deg = face_degree(std::max(u_space.order(), phi_space.order()), 2, true);
  for (int e : mesh.boundary_edges(BoundarySide::Bottom)) {
    const FacePair fp = mesh.face_pair(e);
    const PointSet pts = edge_points(mesh, e, deg, {}, data.breaks);
    Eigen::VectorXd u0(pts.w.size());
    Eigen::VectorXd u1(pts.w.size());
    for (Eigen::Index q = 0; q < pts.w.size(); ++q) {
      const double x = pts.x[static_cast<std::size_t>(q)](1);
      u0(q) = data.u0(x);
      u1(q) = data.u1(x);
    }
    const AffineMap map(mesh, fp.left);
    const BasisAtPoints bu = basis_at(u_space.element(), map, pts.x);
    const BasisAtPoints bp = basis_at(phi_space.element(), map, pts.x);
    const Eigen::VectorXd lv =
        scale_v * (h * bu.value.transpose() * pts.w.cwiseProduct(u0) + h3 * bu.d_t.transpose() * pts.w.cwiseProduct(u1));
    const Eigen::VectorXd lp =
        h2 * bp.value.transpose() * pts.w.cwiseProduct(u1) - h2 * bp.d_t.transpose() * pts.w.cwiseProduct(u0);
    const auto du = u_space.cell_dofs(fp.left);
    const auto dp = phi_space.cell_dofs(fp.left);
    for (std::size_t k = 0; k < du.size(); ++k) {
      if (du[k] >= 0) out.rhs_v(du[k]) += lv(static_cast<Eigen::Index>(k));
    }
    for (std::size_t k = 0; k < dp.size(); ++k) {
      if (dp[k] >= 0) out.rhs_psi(dp[k]) += lp(static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

}  // namespace wavectrl
