#include "wavectrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "wavectrl/error.hpp"
#include "wavectrl/quadrature.hpp"

namespace wavectrl {

namespace {

constexpr double kLocateTol = 1e-12;

std::vector<AffineMap> cell_maps(const Mesh& mesh) {
  std::vector<AffineMap> maps;
  maps.reserve(static_cast<std::size_t>(mesh.num_triangles()));
  for (int c = 0; c < mesh.num_triangles(); ++c) maps.emplace_back(mesh, c);
  return maps;
}

double min_barycentric(const Eigen::Vector2d& r) { return std::min({r(0), r(1), 1.0 - r(0) - r(1)}); }

}  // namespace

PointLocator::PointLocator(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  WAVECTRL_REQUIRE(mesh_ != nullptr, "PointLocator: null mesh");
  maps_ = cell_maps(*mesh_);
  const int n = mesh_->num_triangles();
  const double T = mesh_->final_time();
  const double side = std::sqrt(T / std::max(1, n));
  nt_ = std::max(1, static_cast<int>(std::ceil(T / side)));
  nx_ = std::max(1, static_cast<int>(std::ceil(1.0 / side)));
  dt_ = T / nt_;
  dx_ = 1.0 / nx_;
  buckets_.resize(static_cast<std::size_t>(nt_) * static_cast<std::size_t>(nx_));
  for (int c = 0; c < n; ++c) {
    const auto corners = mesh_->corners(c);
    double t0 = corners[0](0), t1 = t0, x0 = corners[0](1), x1 = x0;
    for (const auto& p : corners) {
      t0 = std::min(t0, p(0));
      t1 = std::max(t1, p(0));
      x0 = std::min(x0, p(1));
      x1 = std::max(x1, p(1));
    }
    const int it0 = std::clamp(static_cast<int>(std::floor(t0 / dt_)), 0, nt_ - 1);
    const int it1 = std::clamp(static_cast<int>(std::floor(t1 / dt_)), 0, nt_ - 1);
    const int ix0 = std::clamp(static_cast<int>(std::floor(x0 / dx_)), 0, nx_ - 1);
    const int ix1 = std::clamp(static_cast<int>(std::floor(x1 / dx_)), 0, nx_ - 1);
    for (int i = it0; i <= it1; ++i) {
      for (int j = ix0; j <= ix1; ++j) buckets_[static_cast<std::size_t>(i * nx_ + j)].push_back(c);
    }
  }
}

PointLocator::Hit PointLocator::locate(const Point& x) const {
  const double T = mesh_->final_time();
  WAVECTRL_REQUIRE(std::isfinite(x(0)) && std::isfinite(x(1)), "PointLocator: non-finite point");
  WAVECTRL_REQUIRE(x(0) >= -kLocateTol && x(0) <= T + kLocateTol && x(1) >= -kLocateTol && x(1) <= 1.0 + kLocateTol,
                   "PointLocator: point outside the domain");
  const int i = std::clamp(static_cast<int>(std::floor(x(0) / dt_)), 0, nt_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(x(1) / dx_)), 0, nx_ - 1);
  Hit best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c : buckets_[static_cast<std::size_t>(i * nx_ + j)]) {
    const Eigen::Vector2d r = maps_[static_cast<std::size_t>(c)].to_reference(x);
    const double score = min_barycentric(r);
    if (score >= 0.0) return {c, r};
    if (score > best_score) {
      best_score = score;
      best = {c, r};
    }
  }
  WAVECTRL_REQUIRE(best.cell >= 0 && best_score > -1e-8, "PointLocator: point not covered by the mesh");
  return best;
}

DiscreteField::DiscreteField(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coeffs, double scale)
    : space_(std::move(space)), coeffs_(std::move(coeffs)), scale_(scale) {
  WAVECTRL_REQUIRE(space_ != nullptr, "DiscreteField: null space");
  WAVECTRL_REQUIRE(coeffs_.size() == space_->num_dofs(), "DiscreteField: coefficient vector has wrong length");
}

Eigen::Vector3d DiscreteField::eval(int cell, const Eigen::Vector2d& ref) const {
  const auto& el = space_->element();
  const Eigen::VectorXd v = el.values(ref);
  const Eigen::MatrixX2d g = el.gradients(ref);
  const auto dofs = space_->cell_dofs(cell);
  double value = 0.0;
  Eigen::Vector2d gref = Eigen::Vector2d::Zero();
  for (int k = 0; k < el.size(); ++k) {
    const int dof = dofs[static_cast<std::size_t>(k)];
    if (dof < 0) continue;
    value += coeffs_(dof) * v(k);
    gref += coeffs_(dof) * g.row(k).transpose();
  }
  const AffineMap map(space_->mesh(), cell);
  const Eigen::Vector2d grad = push_gradient(map.inverse, gref);
  return scale_ * Eigen::Vector3d(value, grad(0), grad(1));
}

std::vector<FieldSample> transfer_reference(const DiscreteField& field, const PointLocator& locator,
                                            const std::vector<Point>& points) {
  WAVECTRL_REQUIRE(&locator.mesh() == &field.space().mesh(), "transfer_reference: locator built on another mesh");
  std::vector<FieldSample> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    const auto hit = locator.locate(x);
    const Eigen::Vector3d v = field.eval(hit.cell, hit.ref);
    out.push_back({v(0), v(1), v(2)});
  }
  return out;
}

ReferenceSolution exact_reference(DataTag tag) {
  WAVECTRL_REQUIRE(has_exact_solution(tag), "exact_reference: no closed form for " + std::string(to_string(tag)));
  ReferenceSolution r;
  r.eval = [tag](const Point& x) { return exact_eval(tag, x(0), x(1)); };
  r.control = [tag](double t) { return exact_control(tag, t); };
  r.volume_breaks = exact_solution_breaks(tag);
  r.control_breaks = exact_control_breaks(tag);
  return r;
}

bool exact_reference_applies(const ControlProblem& pb) {
  return pb.kind == ProblemKind::Boundary && pb.cutoff.is_one() && !pb.potential &&
         std::abs(pb.final_time - 2.0) < 1e-14 && has_exact_solution(pb.data.tag);
}

ReferenceSolution discrete_reference(const ControlProblem& pb, const SolveResult& run) {
  const auto locator = std::make_shared<const PointLocator>(run.setup.mesh);
  const auto u = std::make_shared<const DiscreteField>(run.setup.u_space, run.solution.u);
  const auto phi =
      std::make_shared<const DiscreteField>(run.setup.phi_space, run.solution.phi, run.solution.phi_scale);
  ReferenceSolution r;
  r.eval = [locator, u, phi](const Point& x) {
    const auto hit = locator->locate(x);
    const Eigen::Vector3d uv = u->eval(hit.cell, hit.ref);
    const Eigen::Vector3d pv = phi->eval(hit.cell, hit.ref);
    return ExactValues{uv(0), pv(0), pv(2)};
  };
  if (pb.kind == ProblemKind::Boundary) {
    const Cutoff cutoff = pb.cutoff;
    r.control = [locator, phi, cutoff](double t) {
      const auto hit = locator->locate(Point(t, 1.0));
      return cutoff.on_boundary(t, BoundarySide::Right) * phi->eval(hit.cell, hit.ref)(2);
    };
  }
  return r;
}

int error_degree(int p, int q) { return std::min(kMaxQuadratureDegree, 2 * std::max(p, q) + 6); }

double error_volume(const DiscreteField& num, FieldComponent component, const ScalarField& ref,
                    const ScalarField& weight, int degree, const std::vector<Line>& breaks) {
  const Mesh& mesh = num.space().mesh();
  const QuadratureRule rule = triangle_quadrature(std::min(degree, kMaxQuadratureDegree));
  const int k = component == FieldComponent::Value ? 0 : 2;
  double err2 = 0.0;
  double ref2 = 0.0;
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const AffineMap map(mesh, c);
    const auto pieces = breaks.empty() ? std::vector<std::array<Point, 3>>{mesh.corners(c)}
                                       : split_triangle(mesh.corners(c), breaks);
    for (const auto& piece : pieces) {
      const AffineMap sub(piece);
      for (int q = 0; q < rule.size(); ++q) {
        const Point x = sub.to_physical(rule.points[static_cast<std::size_t>(q)]);
        const double w = rule.weights[static_cast<std::size_t>(q)] * std::abs(sub.det);
        const double chi = weight ? weight(x) : 1.0;
        const double r = ref(x);
        const double v = num.eval(c, map.to_reference(x))(k);
        err2 += w * chi * chi * (v - r) * (v - r);
        ref2 += w * chi * chi * r * r;
      }
    }
  }
  WAVECTRL_REQUIRE(ref2 > 0.0, "error_volume: reference has zero norm");
  return std::sqrt(err2 / ref2);
}

double error_boundary(const DiscreteField& num, FieldComponent component, BoundarySide side,
                      const std::function<double(double)>& target, const std::function<double(double)>& weight,
                      int degree, const std::vector<double>& breaks) {
  WAVECTRL_REQUIRE(side == BoundarySide::Left || side == BoundarySide::Right,
                   "error_boundary: side must be lateral");
  const Mesh& mesh = num.space().mesh();
  const QuadratureRule rule = segment_quadrature(std::min(degree, kMaxQuadratureDegree));
  const int k = component == FieldComponent::Value ? 0 : 2;
  double err2 = 0.0;
  double ref2 = 0.0;
  for (int e : mesh.boundary_edges(side)) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    const Point& a = mesh.vertex(edge.vertices[0]);
    const Point& b = mesh.vertex(edge.vertices[1]);
    const AffineMap map(mesh, edge.left);
    const auto ts = split_interval(std::min(a(0), b(0)), std::max(a(0), b(0)), breaks);
    for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
      const double len = ts[s + 1] - ts[s];
      for (int q = 0; q < rule.size(); ++q) {
        const double t = ts[s] + len * rule.points[static_cast<std::size_t>(q)](0);
        // the side is straight, so interpolate x along the edge
        const double lambda = (t - a(0)) / (b(0) - a(0));
        const Point x = a + lambda * (b - a);
        const double w = rule.weights[static_cast<std::size_t>(q)] * len;
        const double v = (weight ? weight(t) : 1.0) * num.eval(edge.left, map.to_reference(x))(k);
        const double r = target(t);
        err2 += w * (v - r) * (v - r);
        ref2 += w * r * r;
      }
    }
  }
  WAVECTRL_REQUIRE(ref2 > 0.0, "error_boundary: target has zero norm");
  return std::sqrt(err2 / ref2);
}

double error_boundary_control(const ControlProblem& pb, const SolveResult& run,
                              const std::function<double(double)>& target, const std::vector<double>& breaks) {
  WAVECTRL_REQUIRE(pb.kind == ProblemKind::Boundary, "error_boundary_control: boundary problems only");
  const DiscreteField phi(run.setup.phi_space, run.solution.phi, run.solution.phi_scale);
  const Cutoff cutoff = pb.cutoff;
  return error_boundary(phi, FieldComponent::Dx, BoundarySide::Right, target,
                        [cutoff](double t) { return cutoff.on_boundary(t, BoundarySide::Right); },
                        error_degree(pb.p, pb.q), breaks);
}

std::optional<double> ErrorReport::metric(std::string_view name) const {
  if (name == "err_phi_chi") return err_phi_chi;
  if (name == "err_phi") return err_phi;
  if (name == "err_dxphi") return err_dxphi;
  if (name == "err_u") return err_u;
  if (name == "err_v_trace") return err_v_trace;
  if (name == "err_v_control") return err_v_control;
  if (name == "tnorm") return tnorm;
  throw InvalidArgument("unknown error metric '" + std::string(name) + "'");
}

ErrorReport evaluate_errors(const ControlProblem& pb, const SolveResult& run, const ReferenceSolution& ref) {
  WAVECTRL_REQUIRE(static_cast<bool>(ref.eval), "evaluate_errors: empty reference");
  ErrorReport r;
  r.h = run.solution.h;
  r.num_dofs = run.setup.num_u() + run.setup.num_phi();
  r.diagnostics = run.solution.diagnostics;
  const int deg = error_degree(pb.p, pb.q);
  const DiscreteField u(run.setup.u_space, run.solution.u);
  const DiscreteField phi(run.setup.phi_space, run.solution.phi, run.solution.phi_scale);
  const auto& eval = ref.eval;
  const ScalarField ref_u = [&eval](const Point& x) { return eval(x).u; };
  const ScalarField ref_phi = [&eval](const Point& x) { return eval(x).phi; };
  const ScalarField ref_dxphi = [&eval](const Point& x) { return eval(x).dx_phi; };
  const Cutoff cutoff = pb.cutoff;

  if (pb.kind == ProblemKind::Distributed) {
    r.err_phi_chi = error_volume(phi, FieldComponent::Value, ref_phi, [&cutoff](const Point& x) { return cutoff(x); },
                                 deg, ref.volume_breaks);
  }
  r.err_phi = error_volume(phi, FieldComponent::Value, ref_phi, {}, deg, ref.volume_breaks);
  r.err_dxphi = error_volume(phi, FieldComponent::Dx, ref_dxphi, {}, deg, ref.volume_breaks);
  r.err_u = error_volume(u, FieldComponent::Value, ref_u, {}, deg, ref.volume_breaks);
  if (pb.kind == ProblemKind::Boundary && ref.control) {
    r.err_v_trace = error_boundary(u, FieldComponent::Value, BoundarySide::Right, ref.control, {}, deg,
                                   ref.control_breaks);
    r.err_v_control = error_boundary_control(pb, run, ref.control, ref.control_breaks);
  }
  const AssembledForms forms = assemble_forms(pb, run.setup, run.setup.h);
  r.tnorm = residual_norm(pb, forms, run.solution.u, run.solution.phi);
  return r;
}

RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& e) {
  WAVECTRL_REQUIRE(h.size() == e.size(), "fit_rate: size mismatch");
  WAVECTRL_REQUIRE(h.size() >= 3, "fit_rate: need at least 3 data points");
  std::vector<std::size_t> order(h.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&h](std::size_t a, std::size_t b) { return h[a] > h[b]; });
  RateFit fit;
  for (std::size_t i : order) {
    WAVECTRL_REQUIRE(std::isfinite(h[i]) && h[i] > 0.0, "fit_rate: mesh sizes must be positive");
    WAVECTRL_REQUIRE(std::isfinite(e[i]) && e[i] > 0.0, "fit_rate: degenerate errors (zero or non-finite)");
    fit.h.push_back(h[i]);
    fit.e.push_back(e[i]);
  }
  const auto n = static_cast<Eigen::Index>(fit.h.size());
  Eigen::MatrixX2d design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(fit.h[static_cast<std::size_t>(i)]);
    y(i) = std::log(fit.e[static_cast<std::size_t>(i)]);
  }
  const double spread = design.col(1).maxCoeff() - design.col(1).minCoeff();
  WAVECTRL_REQUIRE(spread > 1e-12, "fit_rate: mesh sizes must be distinct");
  fit.slope = design.colPivHouseholderQr().solve(y)(1);
  const std::size_t m = fit.h.size();
  const double dh = std::log(fit.h[m - 2]) - std::log(fit.h[m - 1]);
  WAVECTRL_REQUIRE(std::abs(dh) > 1e-12, "fit_rate: mesh sizes must be distinct");
  fit.last_slope = (std::log(fit.e[m - 2]) - std::log(fit.e[m - 1])) / dh;
  return fit;
}

ExactNorms exact_norms(DataTag tag, int degree, int cells) {
  WAVECTRL_REQUIRE(has_exact_solution(tag), "exact_norms: no closed form for this data");
  WAVECTRL_REQUIRE(cells >= 1, "exact_norms: cells must be positive");
  constexpr double kT = 2.0;
  const std::vector<Line> breaks = exact_solution_breaks(tag);
  const QuadratureRule tri = triangle_quadrature(std::min(degree, kMaxQuadratureDegree));
  const int nt = 2 * cells;
  const double dt = kT / nt;
  const double dx = 1.0 / cells;
  Eigen::Vector3d sums = Eigen::Vector3d::Zero();
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < cells; ++j) {
      const Point p00(i * dt, j * dx);
      const Point p10((i + 1) * dt, j * dx);
      const Point p01(i * dt, (j + 1) * dx);
      const Point p11((i + 1) * dt, (j + 1) * dx);
      for (const auto& tri_corners : {std::array<Point, 3>{p00, p10, p11}, std::array<Point, 3>{p00, p11, p01}}) {
        for (const auto& piece : split_triangle(tri_corners, breaks)) {
          const AffineMap map(piece);
          for (int q = 0; q < tri.size(); ++q) {
            const Point x = map.to_physical(tri.points[static_cast<std::size_t>(q)]);
            const double w = tri.weights[static_cast<std::size_t>(q)] * std::abs(map.det);
            const ExactValues e = exact_eval(tag, x(0), x(1));
            sums += w * Eigen::Vector3d(e.u * e.u, e.phi * e.phi, e.dx_phi * e.dx_phi);
          }
        }
      }
    }
  }
  const QuadratureRule seg = segment_quadrature(std::min(degree, kMaxQuadratureDegree));
  double v2 = 0.0;
  std::vector<double> cuts = exact_control_breaks(tag);
  for (int i = 1; i < nt; ++i) cuts.push_back(i * dt);
  const std::vector<double> knots = split_interval(0.0, kT, cuts);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double len = knots[k + 1] - knots[k];
    for (int q = 0; q < seg.size(); ++q) {
      const double t = knots[k] + len * seg.points[static_cast<std::size_t>(q)](0);
      const double v = exact_control(tag, t);
      v2 += seg.weights[static_cast<std::size_t>(q)] * len * v * v;
    }
  }
  ExactNorms n;
  n.v = std::sqrt(v2);
  n.u = std::sqrt(sums(0));
  n.phi = std::sqrt(sums(1));
  n.dx_phi = std::sqrt(sums(2));
  return n;
}

}  // namespace wavectrl
