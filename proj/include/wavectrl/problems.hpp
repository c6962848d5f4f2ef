#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "wavectrl/geometry.hpp"
#include "wavectrl/mesh.hpp"

namespace wavectrl {

enum class CutoffMode : std::uint8_t { Smooth, Indicator, One };

/// chi(t, x) = chi0(t) chi1(x)^2 with the smooth bumps
///   chi0(t) = exp(-1/(2t)) exp(-1/(2(T-t))) / exp(-2/T),
///   chi1(x) = exp(-1/(5(x-a))) exp(-1/(5(b-x))) / exp(-4/(5(b-a)))  on [a, b].
/// On the lateral boundary only chi0 and the set of controlled sides matter.
class Cutoff {
 public:
  static Cutoff smooth(double final_time, double a, double b);
  /// chi0 = 1, chi1 = indicator of (a, b).
  static Cutoff indicator(double a, double b);
  static Cutoff one();

  [[nodiscard]] CutoffMode mode() const { return mode_; }
  [[nodiscard]] bool is_one() const { return mode_ == CutoffMode::One; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }

  [[nodiscard]] double chi0(double t) const;
  [[nodiscard]] double chi1(double x) const;
  [[nodiscard]] double operator()(const Point& p) const {
    const double c1 = chi1(p(1));
    return chi0(p(0)) * c1 * c1;
  }

  /// Weight on the lateral boundary: chi0(t) on controlled sides, else 0.
  [[nodiscard]] double on_boundary(double t, BoundarySide side) const;
  [[nodiscard]] bool controls(BoundarySide side) const;
  /// Defaults to the right side x = 1 only.
  [[nodiscard]] Cutoff with_control_sides(bool left, bool right) const;

  /// Lines along which the volume weight is discontinuous.
  [[nodiscard]] std::vector<Line> volume_breaks() const;
  /// Whether volume integrands need the enlarged quadrature degree.
  [[nodiscard]] bool smooth_nonpolynomial() const { return mode_ == CutoffMode::Smooth; }

 private:
  Cutoff(CutoffMode mode, double final_time, double a, double b);

  CutoffMode mode_;
  double final_time_;
  double a_;
  double b_;
  bool left_ = false;
  bool right_ = true;
};

inline Cutoff make_cutoff(double final_time, double a, double b) { return Cutoff::smooth(final_time, a, b); }
inline Cutoff make_trivial_cutoff() { return Cutoff::one(); }

enum class DataTag : std::uint8_t { Ex1, Ex2, Ex2b, Ex3, RoughIndicator, Zero, Custom };

std::string_view to_string(DataTag tag);
DataTag parse_data_tag(std::string_view name);

using Profile = std::function<double(double)>;

/// Initial state (u0, u1) on (0, 1) with the abscissas where either is
/// discontinuous or has a kink.
struct InitialData {
  DataTag tag = DataTag::Zero;
  Profile u0;
  Profile u1;
  std::vector<double> breaks;

  [[nodiscard]] bool is_zero() const { return tag == DataTag::Zero; }
};

InitialData make_initial_data(DataTag tag);
InitialData make_ex2b_data();

/// Smooth cutoff equal to 1 on [0.1, 0.9], flat to all orders at 0 and 1.
double ex2b_bump(double x);

struct ExactValues {
  double u = 0.0;
  double phi = 0.0;
  double dx_phi = 0.0;
};

/// Closed-form boundary-control solutions on (0,2) x (0,1) with chi = 1 and
/// control acting at x = 1. Supported tags: Ex1, Ex2, Ex3.
[[nodiscard]] bool has_exact_solution(DataTag tag);
ExactValues exact_eval(DataTag tag, double t, double x);
double exact_control(DataTag tag, double t);

/// Characteristic lines x +- t = const carrying the kinks and jumps of the
/// exact solutions, for quadrature subdivision.
std::vector<Line> exact_solution_breaks(DataTag tag);
/// Times where the exact control has a kink or jump.
std::vector<double> exact_control_breaks(DataTag tag);

/// The piecewise adjoint state of Ex3 (initial velocity -2x on (0,1/2)).
double ex3_adjoint(double t, double x);
double ex3_adjoint_dx(double t, double x);

}  // namespace wavectrl
