#include "wavectrl/system.hpp"

#include <cmath>
#include <future>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "wavectrl/error.hpp"

namespace wavectrl {

std::string_view to_string(ProblemKind kind) {
  return kind == ProblemKind::Distributed ? "distributed" : "boundary";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "distributed") return ProblemKind::Distributed;
  if (name == "boundary") return ProblemKind::Boundary;
  throw InvalidArgument("unknown problem kind '" + std::string(name) + "'");
}

void ControlProblem::validate() const {
  WAVECTRL_REQUIRE(final_time > 0.0, "problem: final time must be positive");
  WAVECTRL_REQUIRE(p >= 1 && p <= 3 && q >= 1 && q <= 3, "problem: orders p, q must lie in 1..3");
  if (kind == ProblemKind::Distributed) {
    WAVECTRL_REQUIRE(kappa < 2.0, "problem: distributed control needs kappa < 2");
    WAVECTRL_REQUIRE(!potential, "problem: potential is only supported for boundary control");
  } else {
    WAVECTRL_REQUIRE(kappa <= 0.0, "problem: boundary control needs kappa <= 0");
    WAVECTRL_REQUIRE(gamma > 0.0 && gamma < 1.0, "problem: gamma must lie in (0, 1)");
  }
  WAVECTRL_REQUIRE(data.tag == DataTag::Zero || (data.u0 && data.u1), "problem: initial data incomplete");
}

std::string config_signature(const ControlProblem& pb, const Mesh& mesh) {
  std::ostringstream s;
  s << std::setprecision(17) << "kind=" << to_string(pb.kind) << " T=" << pb.final_time << " p=" << pb.p
    << " q=" << pb.q << " kappa=" << pb.kappa << " gamma=" << pb.gamma
    << " chi=" << static_cast<int>(pb.cutoff.mode()) << ':' << pb.cutoff.a() << ':' << pb.cutoff.b() << ':'
    << pb.cutoff.controls(BoundarySide::Left) << pb.cutoff.controls(BoundarySide::Right)
    << " data=" << to_string(pb.data.tag) << " V=" << pb.potential_value << " mesh=" << std::hex
    << mesh.fingerprint();
  return s.str();
}

std::uint64_t config_fingerprint(const ControlProblem& pb, const Mesh& mesh) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : config_signature(pb, mesh)) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

DiscreteSetup make_setup(const ControlProblem& pb, std::shared_ptr<const Mesh> mesh) {
  WAVECTRL_REQUIRE(mesh != nullptr, "make_setup: null mesh");
  WAVECTRL_REQUIRE(std::abs(mesh->final_time() - pb.final_time) <= 1e-12 * pb.final_time,
                   "make_setup: mesh final time does not match the problem");
  DiscreteSetup s;
  s.mesh = mesh;
  s.u_space = std::make_shared<const FeSpace>(mesh, pb.p, pb.lateral_constraint());
  s.phi_space = std::make_shared<const FeSpace>(mesh, pb.q, pb.lateral_constraint());
  s.h = mesh->h();
  return s;
}

AssembledForms assemble_forms(const ControlProblem& pb, const DiscreteSetup& setup, double h) {
  pb.validate();
  WAVECTRL_REQUIRE(h > 0.0, "assemble_forms: h must be positive");
  const FeSpace& us = *setup.u_space;
  const FeSpace& ps = *setup.phi_space;
  const bool boundary = pb.kind == ProblemKind::Boundary;
  const Potential potential = boundary ? pb.potential : Potential{};

  auto s_u = std::async(std::launch::async, [&] { return assemble_s(us, h, potential); });
  auto s_phi = std::async(std::launch::async, [&] { return assemble_s(ps, h, potential); });

  AssembledForms f;
  f.kind = pb.kind;
  f.h = h;
  f.e_bottom = assemble_e_slice(us, h, BoundarySide::Bottom);
  f.e_top = assemble_e_slice(us, h, BoundarySide::Top);
  if (boundary) {
    BoundaryFormFamily fam = assemble_boundary_family(us, ps, h, pb.cutoff, potential);
    f.a = std::move(fam.a);
    f.c = std::move(fam.c);
    f.ctilde = std::move(fam.ctilde);
    f.rho = std::move(fam.rho);
    f.b_u = std::move(fam.b_u);
    f.b_phi = std::move(fam.b_phi);
  } else {
    f.a = assemble_a_dist(us, ps, h);
    f.c = assemble_c_dist(ps, ps, h, pb.cutoff);
    f.ctilde = assemble_ctilde_dist(ps, h, pb.cutoff);
    f.rho = assemble_rho_dist(us, ps, h, pb.cutoff);
    f.b_u = {FormName::BGamma, SparseMatrix(us.num_dofs(), us.num_dofs()), h};
    f.b_phi = {FormName::BGamma, SparseMatrix(ps.num_dofs(), ps.num_dofs()), h};
  }
  f.load = assemble_load(us, ps, h, pb.kappa, pb.data);
  f.s_u = s_u.get();
  f.s_phi = s_phi.get();
  return f;
}

namespace {

struct Blocks {
  SparseMatrix uu;
  SparseMatrix phiphi;
  SparseMatrix uphi;  // rows u, cols phi
};

Blocks operator_blocks(const ControlProblem& pb, const AssembledForms& f) {
  const double h = f.h;
  const double hk = std::pow(h, pb.kappa);
  const double hmk = std::pow(h, -pb.kappa);
  const SparseMatrix s_u = f.s_u.volume.matrix + f.s_u.jump.matrix;
  const SparseMatrix s_phi = f.s_phi.volume.matrix + f.s_phi.jump.matrix;
  const SparseMatrix e = f.e_bottom.matrix + f.e_top.matrix;
  const SparseMatrix a_t = f.a.matrix.transpose();
  Blocks b;
  if (pb.kind == ProblemKind::Distributed) {
    b.uu = hmk * (s_u + e);
    b.phiphi = -hk * s_phi - h * h * f.c.matrix + std::pow(h, 4.0 - pb.kappa) * f.ctilde.matrix;
    b.uphi = a_t + std::pow(h, 2.0 - pb.kappa) * f.rho.matrix;
  } else {
    const double g = pb.gamma;
    b.uu = hmk * (s_u + e + g * f.b_u.matrix);
    b.phiphi = -hk * (s_phi + f.b_phi.matrix) - f.c.matrix + g * hmk * f.ctilde.matrix;
    b.uphi = -a_t + g * hmk * f.rho.matrix;
  }
  return b;
}

SparseMatrix stack(const Blocks& b) {
  const Eigen::Index nu = b.uu.rows();
  const Eigen::Index np = b.phiphi.rows();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(b.uu.nonZeros() + b.phiphi.nonZeros() + 2 * b.uphi.nonZeros()));
  const auto put = [&](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0, bool transpose) {
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        if (transpose) {
          t.emplace_back(r0 + it.col(), c0 + it.row(), it.value());
        } else {
          t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        }
      }
    }
  };
  put(b.uu, 0, 0, false);
  put(b.phiphi, nu, nu, false);
  put(b.uphi, 0, nu, false);
  put(b.uphi, nu, 0, true);
  SparseMatrix m(nu + np, nu + np);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

LinearSystem compose_system(const ControlProblem& pb, const AssembledForms& forms) {
  LinearSystem sys;
  sys.num_u = static_cast<int>(forms.e_bottom.rows());
  sys.num_phi = static_cast<int>(forms.c.rows());
  sys.matrix = stack(operator_blocks(pb, forms));
  sys.rhs.resize(sys.num_u + sys.num_phi);
  sys.rhs.head(sys.num_u) = forms.load.rhs_v;
  // the boundary Lagrangian enters the adjoint row with the opposite sign
  const double sign = pb.kind == ProblemKind::Boundary ? -1.0 : 1.0;
  sys.rhs.tail(sys.num_phi) = sign * forms.load.rhs_psi;
  return sys;
}

LinearSystem build_system(const ControlProblem& pb, const DiscreteSetup& setup) {
  return compose_system(pb, assemble_forms(pb, setup, setup.h));
}

GammaBlocks gamma_blocks(const ControlProblem& pb, const AssembledForms& forms) {
  WAVECTRL_REQUIRE(pb.kind == ProblemKind::Boundary, "gamma_blocks: boundary problems only");
  const double hmk = std::pow(forms.h, -pb.kappa);
  const double g = pb.gamma;
  return {g * hmk * forms.b_u.matrix, g * hmk * forms.ctilde.matrix, g * hmk * forms.rho.matrix};
}

namespace {

template <typename Factorization>
Eigen::VectorXd refine(const Factorization& f, const SparseMatrix& a, const Eigen::VectorXd& b, SolverDiagnostics& d) {
  const double bnorm = b.norm();
  Eigen::VectorXd x = f.solve(b);
  Eigen::VectorXd r = b - a * x;
  d.relative_residual = r.norm() / bnorm;
  d.refinement_steps = 0;
  while (d.relative_residual > 1e-14 && d.refinement_steps < 3) {
    const Eigen::VectorXd x_new = x + f.solve(r);
    const Eigen::VectorXd r_new = b - a * x_new;
    const double res = r_new.norm() / bnorm;
    ++d.refinement_steps;
    if (!(res < d.relative_residual)) break;
    x = x_new;
    r = r_new;
    d.relative_residual = res;
  }
  return x;
}

}  // namespace

Eigen::VectorXd solve_sparse(const SparseMatrix& a, const Eigen::VectorXd& b, SolverDiagnostics* diag, double tol) {
  WAVECTRL_REQUIRE(a.rows() == a.cols() && a.rows() == b.size(), "solve_sparse: dimension mismatch");
  SolverDiagnostics d;
  if (b.norm() == 0.0) {
    d.method = "zero-rhs";
    if (diag != nullptr) *diag = d;
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd x;
  bool done = false;
  {
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(a);
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd pivots = ldlt.vectorD();
      d.method = "ldlt";
      d.factor_nonzeros = static_cast<double>(ldlt.matrixL().nestedExpression().nonZeros());
      d.positive_pivots = static_cast<int>((pivots.array() > 0.0).count());
      d.negative_pivots = static_cast<int>((pivots.array() < 0.0).count());
      const double dmax = pivots.cwiseAbs().maxCoeff();
      d.pivot_ratio = dmax > 0.0 ? pivots.cwiseAbs().minCoeff() / dmax : 0.0;
      x = refine(ldlt, a, b, d);
      done = std::isfinite(d.relative_residual) && d.relative_residual <= tol;
    }
  }
  if (!done) {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
      if (diag != nullptr) *diag = d;
      throw SolverError("sparse factorization failed (" + lu.lastErrorMessage() +
                        "); try a larger gamma or a smaller |kappa|");
    }
    d.method = "lu";
    d.factor_nonzeros = static_cast<double>(lu.nnzL() + lu.nnzU());
    d.positive_pivots = 0;
    d.negative_pivots = 0;
    d.pivot_ratio = 0.0;
    x = refine(lu, a, b, d);
  }
  if (diag != nullptr) *diag = d;
  if (!std::isfinite(d.relative_residual) || d.relative_residual > tol) {
    std::ostringstream msg;
    msg << "sparse solve: relative residual " << d.relative_residual << " above " << tol
        << "; try a larger gamma or a smaller |kappa|";
    throw SolverError(msg.str());
  }
  return x;
}

SolveResult solve(const ControlProblem& pb, std::shared_ptr<const Mesh> mesh) {
  SolveResult out;
  out.setup = make_setup(pb, std::move(mesh));
  const LinearSystem sys = build_system(pb, out.setup);
  Solution& sol = out.solution;
  const Eigen::VectorXd x = solve_sparse(sys.matrix, sys.rhs, &sol.diagnostics);
  sol.u = x.head(sys.num_u);
  sol.phi = x.tail(sys.num_phi);
  sol.h = out.setup.h;
  sol.phi_scale = pb.phi_scale(sol.h);
  sol.fingerprint = config_fingerprint(pb, *out.setup.mesh);
  sol.mesh_fingerprint = out.setup.mesh->fingerprint();
  return out;
}

double residual_norm_squared(const ControlProblem& pb, const AssembledForms& f, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& phi) {
  const double h = f.h;
  const double hk = std::pow(h, pb.kappa);
  const double hmk = std::pow(h, -pb.kappa);
  const double su = f.s_u.volume.apply(u, u) + f.s_u.jump.apply(u, u);
  const double sp = f.s_phi.volume.apply(phi, phi) + f.s_phi.jump.apply(phi, phi);
  const double e = f.e_bottom.apply(u, u) + f.e_top.apply(u, u);
  if (pb.kind == ProblemKind::Distributed) {
    return hmk * su + hk * sp + h * h * f.c.apply(phi, phi) + hmk * e;
  }
  return hmk * (su + f.b_u.apply(u, u)) + hk * (sp + f.b_phi.apply(phi, phi)) + f.c.apply(phi, phi) + hmk * e;
}

double residual_norm(const ControlProblem& pb, const AssembledForms& forms, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi) {
  return std::sqrt(std::max(0.0, residual_norm_squared(pb, forms, u, phi)));
}

double stability_rhs(const ControlProblem& pb, const AssembledForms& f, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi) {
  const double h = f.h;
  const double hmk = std::pow(h, -pb.kappa);
  const double ct = f.ctilde.apply(phi, phi);
  if (pb.kind == ProblemKind::Distributed) {
    return residual_norm_squared(pb, f, u, phi) - std::pow(h, 4.0 - pb.kappa) * ct;
  }
  // gamma B(u) in place of B(u) in the residual norm
  return residual_norm_squared(pb, f, u, phi) - (1.0 - pb.gamma) * hmk * f.b_u.apply(u, u) -
         pb.gamma * hmk * ct;
}

double stability_lhs(const LinearSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& phi) {
  WAVECTRL_REQUIRE(u.size() == sys.num_u && phi.size() == sys.num_phi, "stability_lhs: dimension mismatch");
  Eigen::VectorXd x(sys.num_u + sys.num_phi);
  x << u, phi;
  Eigen::VectorXd y(sys.num_u + sys.num_phi);
  y << u, -phi;
  return y.dot(sys.matrix * x);
}

void write_solution(std::ostream& out, const Solution& sol) {
  out << "wavectrl-sol v1\n";
  out << "fingerprint " << std::hex << sol.fingerprint << ' ' << sol.mesh_fingerprint << std::dec << '\n';
  out << std::setprecision(17) << "h " << sol.h << " phi_scale " << sol.phi_scale << '\n';
  out << "u " << sol.u.size() << '\n';
  for (Eigen::Index i = 0; i < sol.u.size(); ++i) out << sol.u(i) << '\n';
  out << "phi " << sol.phi.size() << '\n';
  for (Eigen::Index i = 0; i < sol.phi.size(); ++i) out << sol.phi(i) << '\n';
}

Solution read_solution(std::istream& in) {
  const auto fail = [](const std::string& what) { throw InvalidArgument("read_solution: " + what); };
  std::string line;
  if (!std::getline(in, line) || line != "wavectrl-sol v1") fail("missing header");
  Solution sol;
  std::string key;
  if (!(in >> key >> std::hex >> sol.fingerprint >> sol.mesh_fingerprint >> std::dec) || key != "fingerprint") {
    fail("bad fingerprint line");
  }
  std::string key2;
  if (!(in >> key >> sol.h >> key2 >> sol.phi_scale) || key != "h" || key2 != "phi_scale") fail("bad h line");
  const auto block = [&](const char* name, Eigen::VectorXd& v) {
    long long n = -1;
    if (!(in >> key >> n) || key != name || n < 0) fail(std::string("bad ") + name + " block header");
    v.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!(in >> v(i))) fail(std::string("truncated ") + name + " block");
    }
  };
  block("u", sol.u);
  block("phi", sol.phi);
  return sol;
}

}  // namespace wavectrl
