#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wavectrl/fem.hpp"
#include "wavectrl/geometry.hpp"
#include "wavectrl/mesh.hpp"
#include "wavectrl/problems.hpp"
#include "wavectrl/system.hpp"

namespace wavectrl {

/// Bucket grid over the triangles of a mesh.
class PointLocator {
 public:
  struct Hit {
    int cell = -1;
    Eigen::Vector2d ref = Eigen::Vector2d::Zero();
  };

  explicit PointLocator(std::shared_ptr<const Mesh> mesh);

  /// Points on shared edges resolve to either neighbour. Throws
  /// InvalidArgument for points outside the rectangle by more than 1e-12.
  [[nodiscard]] Hit locate(const Point& x) const;
  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<AffineMap> maps_;
  int nt_ = 1;
  int nx_ = 1;
  double dt_ = 1.0;
  double dx_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

/// A finite element function times a constant scale.
class DiscreteField {
 public:
  DiscreteField(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coeffs, double scale = 1.0);

  [[nodiscard]] const FeSpace& space() const { return *space_; }
  [[nodiscard]] const Eigen::VectorXd& coeffs() const { return coeffs_; }
  [[nodiscard]] double scale() const { return scale_; }

  /// value, d_t, d_x at a reference point of a cell
  [[nodiscard]] Eigen::Vector3d eval(int cell, const Eigen::Vector2d& ref) const;

 private:
  std::shared_ptr<const FeSpace> space_;
  Eigen::VectorXd coeffs_;
  double scale_;
};

struct FieldSample {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
};

/// Evaluate a field from another mesh at arbitrary points.
std::vector<FieldSample> transfer_reference(const DiscreteField& field, const PointLocator& locator,
                                            const std::vector<Point>& points);

/// Reference state for error measurement: closed form or a fine discrete run.
/// Values are in physical scaling (phi, not phi_h).
struct ReferenceSolution {
  std::function<ExactValues(const Point&)> eval;
  std::function<double(double)> control;  // empty without a boundary control
  std::vector<Line> volume_breaks;
  std::vector<double> control_breaks;
};

ReferenceSolution exact_reference(DataTag tag);
/// Closed forms describe the boundary problem with chi = 1, T = 2, V = 0.
bool exact_reference_applies(const ControlProblem& pb);
ReferenceSolution discrete_reference(const ControlProblem& pb, const SolveResult& run);

enum class FieldComponent { Value, Dx };

/// ||w (num - ref)||_{L2(M)} / ||w ref||_{L2(M)}, integrated over the cells of
/// the numerical field's mesh, split along the break lines.
double error_volume(const DiscreteField& num, FieldComponent component, const ScalarField& ref,
                    const ScalarField& weight, int degree, const std::vector<Line>& breaks = {});

/// ||target - num||_{L2(0,T)} / ||target|| on one lateral side, where num(t)
/// is the control weight(t) * d_x or the trace, taken from the adjacent cell.
double error_boundary(const DiscreteField& num, FieldComponent component, BoundarySide side,
                      const std::function<double(double)>& target, const std::function<double(double)>& weight,
                      int degree, const std::vector<double>& breaks = {});

/// Relative L2(0,T) error of the recovered boundary control h chi d_x phi_h.
double error_boundary_control(const ControlProblem& pb, const SolveResult& run,
                              const std::function<double(double)>& target, const std::vector<double>& breaks = {});

int error_degree(int p, int q);

/// L2 norms of a closed-form solution on (0,2) x (0,1), integrated on a
/// uniform grid refined along the characteristic breaks.
struct ExactNorms {
  double v = 0.0;  // L2(0,2)
  double u = 0.0;
  double phi = 0.0;
  double dx_phi = 0.0;
};

ExactNorms exact_norms(DataTag tag, int degree = 12, int cells = 8);

struct ErrorReport {
  double h = 0.0;
  int nx = 0;
  int num_dofs = 0;
  std::optional<double> err_phi_chi;
  std::optional<double> err_phi;
  std::optional<double> err_dxphi;
  std::optional<double> err_u;
  std::optional<double> err_v_trace;
  std::optional<double> err_v_control;
  double tnorm = 0.0;
  SolverDiagnostics diagnostics;

  [[nodiscard]] std::optional<double> metric(std::string_view name) const;
};

ErrorReport evaluate_errors(const ControlProblem& pb, const SolveResult& run, const ReferenceSolution& ref);

struct RateFit {
  std::vector<double> h;
  std::vector<double> e;
  double slope = 0.0;       // least squares of log e against log h
  double last_slope = 0.0;  // over the two smallest h
};

/// Needs at least 3 positive, finite errors on distinct mesh sizes.
RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& e);

enum class ReferenceMode { Exact, FinestRun };

struct StudyOptions {
  ControlProblem problem;
  std::vector<int> nx_list;
  MeshPattern pattern = MeshPattern::Alternating;
  double jitter = 0.1;
  std::uint64_t seed = 20240607;
  ReferenceMode reference = ReferenceMode::Exact;
  int reference_nx = 128;
  int reference_p = 3;
  int reference_q = 3;
  /// Precomputed reference; overrides `reference` when set.
  std::shared_ptr<const ReferenceSolution> reference_solution;
  /// Column used for the rate fit; empty picks err_v_control (boundary) or
  /// err_phi_chi (distributed).
  std::string metric;
  int threads = 1;
};

struct StudyResult {
  std::vector<ErrorReport> reports;  // sorted by decreasing h
  std::string metric;
  std::optional<RateFit> fit;
  std::vector<std::string> failures;

  [[nodiscard]] bool partial() const { return !failures.empty(); }
};

/// Square cells in the mean: nt = round(nx T).
std::shared_ptr<const Mesh> make_study_mesh(double final_time, int nx, MeshPattern pattern, double jitter,
                                            std::uint64_t seed);

StudyResult convergence_study(const StudyOptions& options);

void write_study_csv(std::ostream& out, const StudyResult& result);

}  // namespace wavectrl
