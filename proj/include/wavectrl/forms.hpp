#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wavectrl/fem.hpp"
#include "wavectrl/problems.hpp"

namespace wavectrl {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class FormName : std::uint8_t {
  ADist,
  ABd,
  SVol,
  SJump,
  ESlice,
  CDist,
  CTildeDist,
  RhoDist,
  BGamma,
  CBd,
  CTildeBd,
  RhoBd,
};

std::string_view to_string(FormName name);

/// One assembled bilinear form. Entry (i, j) is form(trial_j, test_i), so
/// rows follow the test space and columns the trial space. The coupling
/// forms rho_* are stored with rows on the u-space and columns on the
/// phi-space, i.e. entry (i, j) = rho(u_i, phi_j).
struct FormMatrix {
  FormName name = FormName::SVol;
  SparseMatrix matrix;
  double h = 0.0;

  [[nodiscard]] Eigen::Index rows() const { return matrix.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return matrix.cols(); }
  /// x^T M y
  [[nodiscard]] double apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return x.dot(matrix * y);
  }
};

/// Zero potential when empty.
using Potential = ScalarField;

// -- distributed control ----------------------------------------------------

/// a(u, psi) = int g(h du, h dpsi) - h (u, h d_nu psi) over t = 0 and t = T,
/// with the Minkowski form g(du, dv) = -u_t v_t + u_x v_x and
/// d_nu = -N_t d_t + N_x d_x for the outward Euclidean normal N.
FormMatrix assemble_a_dist(const FeSpace& trial, const FeSpace& test, double h);

struct StabilizerForms {
  FormMatrix volume;  // sum_K (h^2 P u, h^2 P v)_K,  P = box + V
  FormMatrix jump;    // sum_F h ([h d_nu u], [h d_nu v])_F
};

StabilizerForms assemble_s(const FeSpace& space, double h, const Potential& potential = {});

/// The jump quadratic form evaluated face by face, without cancellation
/// between the assembled entries.
double jump_energy(const FeSpace& space, const Eigen::VectorXd& coeffs, double h);

/// h (u, v) + h (h u_t, h v_t) on the slice t = 0 (Bottom) or t = T (Top).
FormMatrix assemble_e_slice(const FeSpace& space, double h, BoundarySide slice);

/// (chi phi, psi) over M.
FormMatrix assemble_c_dist(const FeSpace& trial, const FeSpace& test, double h, const Cutoff& cutoff);
/// (chi phi, chi psi) over M.
FormMatrix assemble_ctilde_dist(const FeSpace& space, double h, const Cutoff& cutoff);
/// rho(u, phi) = -sum_K (h^2 box u, chi phi)_K.
FormMatrix assemble_rho_dist(const FeSpace& u_space, const FeSpace& phi_space, double h, const Cutoff& cutoff);

// -- boundary control -------------------------------------------------------

/// a(u, psi) = int g(h du, h dpsi) + h^2 (u, V psi) - h (u, h d_nu psi)_{dM}
///             - h (h d_nu u, psi)_Gamma, Gamma = {x = 0} u {x = 1}.
FormMatrix assemble_a_bd(const FeSpace& trial, const FeSpace& test, double h, const Potential& potential = {});
/// b(u, v) = h (u, v)_Gamma.
FormMatrix assemble_b_gamma(const FeSpace& space, double h);
/// c(phi, psi) = h (chi h d_nu phi, h d_nu psi)_Gamma.
FormMatrix assemble_c_bd(const FeSpace& space, double h, const Cutoff& cutoff);
/// h (chi h d_nu phi, chi h d_nu psi)_Gamma.
FormMatrix assemble_ctilde_bd(const FeSpace& space, double h, const Cutoff& cutoff);
/// rho(u, phi) = -h (u, chi h d_nu phi)_Gamma.
FormMatrix assemble_rho_bd(const FeSpace& u_space, const FeSpace& phi_space, double h, const Cutoff& cutoff);

struct BoundaryFormFamily {
  FormMatrix a;       // rows phi-space, cols u-space
  FormMatrix b_u;
  FormMatrix b_phi;
  FormMatrix c;
  FormMatrix ctilde;
  FormMatrix rho;     // rows u-space, cols phi-space
};

BoundaryFormFamily assemble_boundary_family(const FeSpace& u_space, const FeSpace& phi_space, double h,
                                            const Cutoff& cutoff, const Potential& potential = {});

// -- loads ------------------------------------------------------------------

struct LoadVectors {
  Eigen::VectorXd rhs_v;    // h^-kappa [h (u0, v) + h (h u1, h v_t)] at t = 0
  Eigen::VectorXd rhs_psi;  // L(psi) = h (h u1, psi) - h (u0, h psi_t) at t = 0
};

LoadVectors assemble_load(const FeSpace& u_space, const FeSpace& phi_space, double h, double kappa,
                          const InitialData& data);

/// Quadrature degree for a product of order p and q functions.
int volume_degree(int p, int q, bool nonpolynomial_weight);
int face_degree(int p, int q, bool nonpolynomial_weight);

}  // namespace wavectrl
