#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wavectrl/fem.hpp"
#include "wavectrl/forms.hpp"
#include "wavectrl/mesh.hpp"
#include "wavectrl/problems.hpp"

namespace wavectrl {

enum class ProblemKind : std::uint8_t { Distributed, Boundary };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

struct ControlProblem {
  ProblemKind kind = ProblemKind::Distributed;
  double final_time = 2.0;
  int p = 1;
  int q = 1;
  double kappa = 0.0;
  double gamma = 0.5;
  Cutoff cutoff = Cutoff::one();
  InitialData data = make_initial_data(DataTag::Zero);
  Potential potential;
  /// Constant value of the potential when it was set from a number; only
  /// used for fingerprinting.
  double potential_value = 0.0;

  /// Throws InvalidArgument on out-of-range parameters.
  void validate() const;
  [[nodiscard]] bool lateral_constraint() const { return kind == ProblemKind::Distributed; }
  /// The adjoint state is recovered as phi_scale * phi_h.
  [[nodiscard]] double phi_scale(double h) const { return kind == ProblemKind::Boundary ? h : 1.0; }
};

/// Stable text summary of a problem and mesh, hashed into the fingerprint.
std::string config_signature(const ControlProblem& pb, const Mesh& mesh);
std::uint64_t config_fingerprint(const ControlProblem& pb, const Mesh& mesh);

/// Every form entering the operator, unscaled as returned by the forms module.
struct AssembledForms {
  ProblemKind kind = ProblemKind::Distributed;
  double h = 0.0;
  StabilizerForms s_u;
  StabilizerForms s_phi;
  FormMatrix e_bottom;
  FormMatrix e_top;
  FormMatrix a;       // rows phi-space, cols u-space
  FormMatrix c;
  FormMatrix ctilde;
  FormMatrix rho;     // rows u-space, cols phi-space
  FormMatrix b_u;     // boundary only
  FormMatrix b_phi;   // boundary only
  LoadVectors load;
};

struct DiscreteSetup {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FeSpace> u_space;
  std::shared_ptr<const FeSpace> phi_space;
  double h = 0.0;

  [[nodiscard]] int num_u() const { return u_space->num_dofs(); }
  [[nodiscard]] int num_phi() const { return phi_space->num_dofs(); }
};

DiscreteSetup make_setup(const ControlProblem& pb, std::shared_ptr<const Mesh> mesh);

/// Assemble with an explicit h, so scaling laws can be probed on a fixed mesh.
AssembledForms assemble_forms(const ControlProblem& pb, const DiscreteSetup& setup, double h);

struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  int num_u = 0;
  int num_phi = 0;
};

/// Combine the forms into [[uu, u phi], [phi u, phi phi]] and the load.
LinearSystem compose_system(const ControlProblem& pb, const AssembledForms& forms);
LinearSystem build_system(const ControlProblem& pb, const DiscreteSetup& setup);

/// Blocks of the operator carrying a factor gamma (boundary formulation).
struct GammaBlocks {
  SparseMatrix uu;
  SparseMatrix phiphi;
  SparseMatrix uphi;
};
GammaBlocks gamma_blocks(const ControlProblem& pb, const AssembledForms& forms);

struct SolverDiagnostics {
  std::string method;  // "ldlt", "lu" after an LDL^T breakdown, "zero-rhs" without solving
  int positive_pivots = 0;
  int negative_pivots = 0;
  double pivot_ratio = 0.0;  // min |D| / max |D| of the LDL^T factor
  double factor_nonzeros = 0.0;
  double relative_residual = 0.0;
  int refinement_steps = 0;
};

/// Sparse LDL^T (AMD ordering) with iterative refinement, falling back to a
/// pivoted sparse LU. Throws SolverError when both break down or the relative
/// residual stays above tol.
Eigen::VectorXd solve_sparse(const SparseMatrix& a, const Eigen::VectorXd& b, SolverDiagnostics* diag = nullptr,
                             double tol = 1e-9);

struct Solution {
  Eigen::VectorXd u;
  Eigen::VectorXd phi;
  double h = 0.0;
  double phi_scale = 1.0;
  SolverDiagnostics diagnostics;
  std::uint64_t fingerprint = 0;
  std::uint64_t mesh_fingerprint = 0;
};

struct SolveResult {
  DiscreteSetup setup;
  Solution solution;
};

SolveResult solve(const ControlProblem& pb, std::shared_ptr<const Mesh> mesh);

/// Squared residual norm. Distributed:
///   h^-k S(u) + h^k S(phi) + h^2 C(phi) + h^-k sum E(u).
/// Boundary:
///   h^-k (S(u) + B(u)) + h^k (S(phi) + B(phi)) + C(phi) + h^-k sum E(u).
double residual_norm_squared(const ControlProblem& pb, const AssembledForms& forms, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& phi);
double residual_norm(const ControlProblem& pb, const AssembledForms& forms, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi);

/// Right side of the stability identity A[(u,phi),(u,-phi)] for the problem kind.
double stability_rhs(const ControlProblem& pb, const AssembledForms& forms, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi);

/// Quadratic form x^T A y with y = (u, -phi).
double stability_lhs(const LinearSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& phi);

void write_solution(std::ostream& out, const Solution& sol);
Solution read_solution(std::istream& in);

}  // namespace wavectrl
