#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "wavectrl/analysis.hpp"
#include "wavectrl/error.hpp"
#include "wavectrl/system.hpp"

using namespace wavectrl;

namespace {

std::shared_ptr<const Mesh> mesh(int nx, double T = 2.0, double jitter = 0.0) {
  return make_study_mesh(T, nx, MeshPattern::Alternating, jitter, 20240607);
}

ControlProblem distributed(int p, int q, double kappa = 0.0) {
  ControlProblem pb;
  pb.kind = ProblemKind::Distributed;
  pb.p = p;
  pb.q = q;
  pb.kappa = kappa;
  pb.cutoff = Cutoff::smooth(2.0, 0.1, 0.4);
  pb.data = make_initial_data(DataTag::Ex1);
  return pb;
}

ControlProblem boundary(int p, int q, double gamma = 0.5) {
  ControlProblem pb;
  pb.kind = ProblemKind::Boundary;
  pb.p = p;
  pb.q = q;
  pb.gamma = gamma;
  pb.data = make_initial_data(DataTag::Ex1);
  return pb;
}

double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST(ControlProblem, Validation) {
  ControlProblem pb = distributed(2, 2);
  EXPECT_NO_THROW(pb.validate());
  pb.kappa = 2.0;
  EXPECT_THROW(pb.validate(), InvalidArgument);
  pb = boundary(1, 2);
  pb.gamma = 1.0;
  EXPECT_THROW(pb.validate(), InvalidArgument);
  pb.gamma = 0.5;
  pb.kappa = 0.5;
  EXPECT_THROW(pb.validate(), InvalidArgument);
  pb = boundary(4, 2);
  EXPECT_THROW(pb.validate(), InvalidArgument);
  pb = distributed(1, 1);
  pb.potential = [](const Point&) { return 1.0; };
  EXPECT_THROW(pb.validate(), InvalidArgument);
  EXPECT_EQ(parse_problem_kind("boundary"), ProblemKind::Boundary);
  EXPECT_THROW(parse_problem_kind("neumann"), InvalidArgument);
}

TEST(System, SymmetryAcrossConfigurations) {
  for (int nx : {4, 8}) {
    const auto m = mesh(nx, 2.0, 0.1);
    for (auto [p, q] : {std::pair{1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 3}}) {
      for (const ControlProblem& pb : {distributed(p, q), distributed(p, q, -1.0), boundary(p, q), boundary(p, q, 0.1)}) {
        const LinearSystem sys = build_system(pb, make_setup(pb, m));
        const SparseMatrix d = sys.matrix - SparseMatrix(sys.matrix.transpose());
        EXPECT_LE(max_abs(d), 1e-12 * max_abs(sys.matrix));
        EXPECT_EQ(sys.matrix.rows(), sys.num_u + sys.num_phi);
      }
    }
  }
}

TEST(System, DistributedStabilityIdentity) {
  std::mt19937 rng(11);
  for (double kappa : {0.0, -1.0, 1.0}) {
    for (int nx : {4, 8, 16}) {
      const ControlProblem pb = distributed(2, 2, kappa);
      const DiscreteSetup setup = make_setup(pb, mesh(nx));
      const AssembledForms forms = assemble_forms(pb, setup, setup.h);
      const LinearSystem sys = compose_system(pb, forms);
      for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd u = random_vector(sys.num_u, rng);
        const Eigen::VectorXd phi = random_vector(sys.num_phi, rng);
        const double lhs = stability_lhs(sys, u, phi);
        const double rhs = stability_rhs(pb, forms, u, phi);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * residual_norm_squared(pb, forms, u, phi));
      }
    }
  }
}

TEST(System, BoundaryStabilityIdentity) {
  std::mt19937 rng(12);
  for (double gamma : {0.1, 0.5}) {
    for (double kappa : {0.0, -1.0}) {
      for (int nx : {4, 8, 16}) {
        ControlProblem pb = boundary(1, 2, gamma);
        pb.kappa = kappa;
        const DiscreteSetup setup = make_setup(pb, mesh(nx));
        const AssembledForms forms = assemble_forms(pb, setup, setup.h);
        const LinearSystem sys = compose_system(pb, forms);
        for (int i = 0; i < 20; ++i) {
          const Eigen::VectorXd u = random_vector(sys.num_u, rng);
          const Eigen::VectorXd phi = random_vector(sys.num_phi, rng);
          EXPECT_LE(std::abs(stability_lhs(sys, u, phi) - stability_rhs(pb, forms, u, phi)),
                    1e-10 * residual_norm_squared(pb, forms, u, phi));
        }
      }
    }
  }
}

TEST(System, BoundaryIdentityFromForms) {
  // identity written out from the individual forms
  std::mt19937 rng(13);
  const ControlProblem pb = boundary(2, 3, 0.3);
  const DiscreteSetup setup = make_setup(pb, mesh(6, 2.0, 0.1));
  const double h = setup.h;
  const AssembledForms f = assemble_forms(pb, setup, h);
  const LinearSystem sys = compose_system(pb, f);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd u = random_vector(sys.num_u, rng);
    const Eigen::VectorXd phi = random_vector(sys.num_phi, rng);
    const double expected = f.s_u.volume.apply(u, u) + f.s_u.jump.apply(u, u) + pb.gamma * f.b_u.apply(u, u) +
                            f.s_phi.volume.apply(phi, phi) + f.s_phi.jump.apply(phi, phi) + f.b_phi.apply(phi, phi) +
                            f.c.apply(phi, phi) + f.e_bottom.apply(u, u) + f.e_top.apply(u, u) -
                            pb.gamma * f.ctilde.apply(phi, phi);
    EXPECT_NEAR(stability_lhs(sys, u, phi), expected, 1e-10 * std::abs(expected) + 1e-14);
  }
}

TEST(System, GammaTouchesOnlyTaggedBlocks) {
  const auto m = mesh(4, 2.0, 0.1);
  const ControlProblem a = boundary(1, 2, 0.2);
  const ControlProblem b = boundary(1, 2, 0.4);
  const DiscreteSetup setup = make_setup(a, m);
  const AssembledForms f = assemble_forms(a, setup, setup.h);
  const LinearSystem sa = compose_system(a, f);
  const LinearSystem sb = compose_system(b, f);
  const GammaBlocks g = gamma_blocks(a, f);
  const SparseMatrix diff = sb.matrix - sa.matrix;
  // going from 0.2 to 0.4 adds exactly the blocks evaluated at 0.2
  SparseMatrix expected(diff.rows(), diff.cols());
  std::vector<Eigen::Triplet<double>> trips;
  const auto add = [&trips](const SparseMatrix& blk, Eigen::Index r0, Eigen::Index c0, double s) {
    for (int k = 0; k < blk.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(blk, k); it; ++it)
        trips.emplace_back(static_cast<int>(it.row() + r0), static_cast<int>(it.col() + c0), s * it.value());
  };
  add(g.uu, 0, 0, 1.0);
  add(g.phiphi, sa.num_u, sa.num_u, 1.0);
  add(g.uphi, 0, sa.num_u, 1.0);
  add(SparseMatrix(g.uphi.transpose()), sa.num_u, 0, 1.0);
  expected.setFromTriplets(trips.begin(), trips.end());
  EXPECT_LE(max_abs(diff - expected), 1e-12 * max_abs(sa.matrix));
  EXPECT_TRUE(sa.rhs.isApprox(sb.rhs));
}

TEST(System, ZeroDataGivesZero) {
  for (const ControlProblem& base : {distributed(2, 2), boundary(1, 2)}) {
    ControlProblem pb = base;
    pb.data = make_initial_data(DataTag::Zero);
    const SolveResult r = solve(pb, mesh(6, 2.0, 0.1));
    EXPECT_LE(r.solution.u.norm(), 1e-10);
    EXPECT_LE(r.solution.phi.norm(), 1e-10);
  }
}

TEST(System, SolverAccuracyAndDiagnostics) {
  const ControlProblem pb = boundary(1, 2);
  const auto m = mesh(8, 2.0, 0.1);
  const DiscreteSetup setup = make_setup(pb, m);
  const LinearSystem sys = build_system(pb, setup);
  SolverDiagnostics d;
  const Eigen::VectorXd x = solve_sparse(sys.matrix, sys.rhs, &d);
  EXPECT_LE((sys.matrix * x - sys.rhs).norm(), 1e-9 * sys.rhs.norm());
  EXPECT_LE(d.relative_residual, 1e-9);
  EXPECT_FALSE(d.method.empty());
  if (d.method == "ldlt") {
    // saddle structure: both signs appear
    EXPECT_GT(d.positive_pivots, 0);
    EXPECT_GT(d.negative_pivots, 0);
  }
  SolverDiagnostics z;
  EXPECT_TRUE(solve_sparse(sys.matrix, Eigen::VectorXd::Zero(sys.rhs.size()), &z).isZero(0.0));
}

TEST(System, SolverRejectsSingular) {
  SparseMatrix a(3, 3);
  a.insert(0, 0) = 1.0;
  a.insert(1, 1) = 1.0;
  a.makeCompressed();
  EXPECT_THROW(solve_sparse(a, Eigen::Vector3d(1, 1, 1)), SolverError);
}

TEST(System, BoundaryEx1ControlError) {
  ControlProblem pb = boundary(1, 2);
  const SolveResult r = solve(pb, mesh(16, 2.0, 0.1));
  const double e = error_boundary_control(pb, r, [](double t) { return exact_control(DataTag::Ex1, t); });
  EXPECT_GE(e, 1e-3);
  EXPECT_LE(e, 2e-1);
}

TEST(System, DistributedEx1WithinFactorTwoOfFine) {
  const ControlProblem pb = distributed(2, 2);
  const auto control_norm = [&pb](const SolveResult& r) {
    const DiscreteField phi(r.setup.phi_space, r.solution.phi, r.solution.phi_scale);
    const QuadratureRule rule = triangle_quadrature(12);
    double s = 0.0;
    const Mesh& m = *r.setup.mesh;
    for (int c = 0; c < m.num_triangles(); ++c) {
      const AffineMap map(m, c);
      for (int q = 0; q < rule.size(); ++q) {
        const auto& ref = rule.points[static_cast<std::size_t>(q)];
        const double v = pb.cutoff(map.to_physical(ref)) * phi.eval(c, ref)(0);
        s += rule.weights[static_cast<std::size_t>(q)] * std::abs(map.det) * v * v;
      }
    }
    return std::sqrt(s);
  };
  const double coarse = control_norm(solve(pb, mesh(8, 2.0, 0.1)));
  const double fine = control_norm(solve(pb, mesh(24, 2.0, 0.0)));
  EXPECT_TRUE(std::isfinite(coarse));
  EXPECT_GT(coarse, 0.5 * fine);
  EXPECT_LT(coarse, 2.0 * fine);
}

TEST(System, ResidualNormBasics) {
  const ControlProblem pb = distributed(2, 2);
  const DiscreteSetup setup = make_setup(pb, mesh(4, 2.0, 0.1));
  const AssembledForms f = assemble_forms(pb, setup, setup.h);
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(setup.num_u());
  const Eigen::VectorXd p0 = Eigen::VectorXd::Zero(setup.num_phi());
  EXPECT_EQ(residual_norm(pb, f, u0, p0), 0.0);
  std::mt19937 rng(14);
  const Eigen::VectorXd u = random_vector(setup.num_u(), rng);
  const double expected = f.s_u.volume.apply(u, u) + f.s_u.jump.apply(u, u) + f.e_bottom.apply(u, u) + f.e_top.apply(u, u);
  EXPECT_NEAR(residual_norm_squared(pb, f, u, p0), expected, 1e-12 * expected);
}

TEST(System, StabilizerConsistencyOnSmoothWave) {
  // S of the interpolant of a smooth solution of the wave equation decays like h^{p-1} or faster
  const double pi = std::acos(-1.0);
  const auto wave = [pi](const Point& x) { return std::cos(pi * x(0)) * std::sin(pi * x(1)); };
  for (int p = 2; p <= 3; ++p) {
    std::vector<double> hs, rs;
    for (int nx : {4, 8, 16}) {
      const auto m = mesh(nx, 2.0, 0.1);
      const FeSpace s(m, p, true);
      const StabilizerForms st = assemble_s(s, m->h());
      const Eigen::VectorXd c = interpolate(s, wave);
      hs.push_back(m->h());
      rs.push_back(std::sqrt(st.volume.apply(c, c) + st.jump.apply(c, c)));
    }
    const RateFit fit = fit_rate(hs, rs);
    EXPECT_GE(fit.slope, p - 1.0) << "p=" << p;
  }
}

TEST(System, SolutionRoundTrip) {
  const ControlProblem pb = boundary(1, 1);
  const SolveResult r = solve(pb, mesh(4, 2.0, 0.1));
  std::stringstream ss;
  write_solution(ss, r.solution);
  const Solution back = read_solution(ss);
  EXPECT_EQ(back.fingerprint, r.solution.fingerprint);
  EXPECT_EQ(back.mesh_fingerprint, r.solution.mesh_fingerprint);
  EXPECT_EQ(back.h, r.solution.h);
  EXPECT_EQ(back.phi_scale, r.solution.phi_scale);
  EXPECT_EQ((back.u - r.solution.u).norm(), 0.0);
  EXPECT_EQ((back.phi - r.solution.phi).norm(), 0.0);
  std::stringstream bad("wavectrl-sol v9\n");
  EXPECT_THROW(read_solution(bad), InvalidArgument);
}

TEST(System, FingerprintTracksConfiguration) {
  const auto m = mesh(4);
  const ControlProblem a = boundary(1, 2, 0.5);
  const ControlProblem b = boundary(1, 2, 0.25);
  EXPECT_EQ(config_fingerprint(a, *m), config_fingerprint(a, *m));
  EXPECT_NE(config_fingerprint(a, *m), config_fingerprint(b, *m));
}
