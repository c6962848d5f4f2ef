#include "wavectrl/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wavectrl/error.hpp"

namespace wavectrl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGuard = 1e-14;

double ex2_u0(double y) { return y < 0.5 ? 4.0 * y : 4.0 * (1.0 - y); }
double ex3_u0(double y) { return (y > 0.0 && y < 0.5) ? 4.0 * y : 0.0; }

double smooth_step(double y) {
  const auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return f(y) / (f(y) + f(1.0 - y));
}

}  // namespace

Cutoff::Cutoff(CutoffMode mode, double final_time, double a, double b)
    : mode_(mode), final_time_(final_time), a_(a), b_(b) {}

Cutoff Cutoff::smooth(double final_time, double a, double b) {
  WAVECTRL_REQUIRE(final_time > 0.0, "cutoff: final time must be positive");
  WAVECTRL_REQUIRE(0.0 < a && a < b && b < 1.0, "cutoff: need 0 < a < b < 1");
  return {CutoffMode::Smooth, final_time, a, b};
}

Cutoff Cutoff::indicator(double a, double b) {
  WAVECTRL_REQUIRE(0.0 < a && a < b && b < 1.0, "cutoff: need 0 < a < b < 1");
  return {CutoffMode::Indicator, 0.0, a, b};
}

Cutoff Cutoff::one() { return {CutoffMode::One, 0.0, 0.0, 1.0}; }

double Cutoff::chi0(double t) const {
  if (mode_ != CutoffMode::Smooth) return 1.0;
  const double T = final_time_;
  if (t <= kGuard || T - t <= kGuard) return 0.0;
  return std::exp(-0.5 / t - 0.5 / (T - t) + 2.0 / T);
}

double Cutoff::chi1(double x) const {
  switch (mode_) {
    case CutoffMode::One: return 1.0;
    case CutoffMode::Indicator: return (x > a_ && x < b_) ? 1.0 : 0.0;
    case CutoffMode::Smooth: break;
  }
  if (x - a_ <= kGuard || b_ - x <= kGuard) return 0.0;
  return std::exp(-0.2 / (x - a_) - 0.2 / (b_ - x) + 0.8 / (b_ - a_));
}

bool Cutoff::controls(BoundarySide side) const {
  return (side == BoundarySide::Left && left_) || (side == BoundarySide::Right && right_);
}

double Cutoff::on_boundary(double t, BoundarySide side) const { return controls(side) ? chi0(t) : 0.0; }

Cutoff Cutoff::with_control_sides(bool left, bool right) const {
  Cutoff c = *this;
  c.left_ = left;
  c.right_ = right;
  return c;
}

std::vector<Line> Cutoff::volume_breaks() const {
  if (mode_ == CutoffMode::Indicator) return {Line::x_equals(a_), Line::x_equals(b_)};
  return {};
}

std::string_view to_string(DataTag tag) {
  switch (tag) {
    case DataTag::Ex1: return "Ex1";
    case DataTag::Ex2: return "Ex2";
    case DataTag::Ex2b: return "Ex2b";
    case DataTag::Ex3: return "Ex3";
    case DataTag::RoughIndicator: return "RoughIndicator";
    case DataTag::Zero: return "Zero";
    case DataTag::Custom: return "Custom";
  }
  return "?";
}

DataTag parse_data_tag(std::string_view name) {
  for (DataTag t : {DataTag::Ex1, DataTag::Ex2, DataTag::Ex2b, DataTag::Ex3, DataTag::RoughIndicator,
                    DataTag::Zero, DataTag::Custom}) {
    if (name == to_string(t)) return t;
  }
  throw InvalidArgument("unknown example tag '" + std::string(name) + "'");
}

double ex2b_bump(double x) { return smooth_step(x / 0.1) * smooth_step((1.0 - x) / 0.1); }

InitialData make_ex2b_data() {
  // integral of ex2_u0^2 from 0 to x, closed form on both halves
  const auto primitive = [](double x) {
    if (x <= 0.5) return 16.0 * x * x * x / 3.0;
    const double r = 1.0 - x;
    return 4.0 / 3.0 - 16.0 * r * r * r / 3.0;
  };
  return {DataTag::Ex2b, [primitive](double x) { return ex2b_bump(x) * primitive(x); },
          [](double) { return 0.0; }, {0.1, 0.5, 0.9}};
}

InitialData make_initial_data(DataTag tag) {
  const Profile zero = [](double) { return 0.0; };
  switch (tag) {
    case DataTag::Ex1: return {tag, [](double x) { return std::sin(kPi * x); }, zero, {}};
    case DataTag::Ex2: return {tag, ex2_u0, zero, {0.5}};
    case DataTag::Ex2b: return make_ex2b_data();
    case DataTag::Ex3: return {tag, ex3_u0, zero, {0.5}};
    case DataTag::RoughIndicator:
      return {tag, zero, [](double x) { return (x > 0.4 && x < 0.6) ? 1.0 : 0.0; }, {0.4, 0.6}};
    case DataTag::Zero: return {tag, zero, zero, {}};
    case DataTag::Custom: break;
  }
  throw InvalidArgument("make_initial_data: custom data has no factory");
}

double ex3_adjoint(double t, double x) {
  const double s = x + t;
  const double d = x - t;
  if (s < 0.5) return -2.0 * x * t;
  if (s < 1.5 && d > -0.5 && d < 0.5) return 0.5 * d * d - 0.125;
  if (s >= 1.5 && d > -0.5) return 2.0 * (x - 1.0) * (1.0 - t);
  if (s > 1.5 && s < 2.5 && d > -1.5 && d <= -0.5) {
    const double r = s - 2.0;
    return -0.5 * r * r + 0.125;
  }
  if (d <= -1.5) return 2.0 * x * (2.0 - t);
  return 0.0;
}

double ex3_adjoint_dx(double t, double x) {
  const double s = x + t;
  const double d = x - t;
  if (s < 0.5) return -2.0 * t;
  if (s < 1.5 && d > -0.5 && d < 0.5) return d;
  if (s >= 1.5 && d > -0.5) return 2.0 * (1.0 - t);
  if (s > 1.5 && s < 2.5 && d > -1.5 && d <= -0.5) return -(s - 2.0);
  if (d <= -1.5) return 2.0 * (2.0 - t);
  return 0.0;
}

bool has_exact_solution(DataTag tag) {
  return tag == DataTag::Ex1 || tag == DataTag::Ex2 || tag == DataTag::Ex3;
}

ExactValues exact_eval(DataTag tag, double t, double x) {
  switch (tag) {
    case DataTag::Ex1: {
      ExactValues v;
      if (x + t <= 1.0) {
        v.u = 0.5 * (std::sin(kPi * (x + t)) + std::sin(kPi * (x - t)));
      } else if (x - t >= -1.0) {
        v.u = 0.5 * std::sin(kPi * (x - t));
      }
      v.phi = -std::sin(kPi * t) * std::sin(kPi * x) / (2.0 * kPi);
      v.dx_phi = -0.5 * std::sin(kPi * t) * std::cos(kPi * x);
      return v;
    }
    case DataTag::Ex2: {
      ExactValues v;
      if (t - x <= 0.0) v.u += 0.5 * ex2_u0(x - t);
      if (t + x <= 1.0) v.u += 0.5 * ex2_u0(x + t);
      if (t - x >= 0.0 && t - x <= 1.0) v.u -= 0.5 * ex2_u0(t - x);
      v.phi = ex3_adjoint(t, x) + ex3_adjoint(t, 1.0 - x);
      v.dx_phi = ex3_adjoint_dx(t, x) - ex3_adjoint_dx(t, 1.0 - x);
      return v;
    }
    case DataTag::Ex3: {
      ExactValues v;
      if (x + t < 0.5) {
        v.u = 4.0 * x;
      } else if (t - x > -0.5 && t - x < 0.5) {
        v.u = 2.0 * (x - t);
      }
      v.phi = ex3_adjoint(t, x);
      v.dx_phi = ex3_adjoint_dx(t, x);
      return v;
    }
    default: break;
  }
  throw InvalidArgument("exact_eval: no closed-form solution for " + std::string(to_string(tag)));
}

double exact_control(DataTag tag, double t) {
  switch (tag) {
    case DataTag::Ex1: return 0.5 * std::sin(kPi * t);
    case DataTag::Ex2:
      if (t < 0.5) return 2.0 * t;
      if (t < 1.5) return 2.0 * (1.0 - t);
      return 2.0 * (t - 2.0);
    case DataTag::Ex3: return (t >= 0.5 && t < 1.5) ? 2.0 * (1.0 - t) : 0.0;
    default: break;
  }
  throw InvalidArgument("exact_control: no closed-form control for " + std::string(to_string(tag)));
}

std::vector<Line> exact_solution_breaks(DataTag tag) {
  switch (tag) {
    case DataTag::Ex1: return {Line::x_plus_t(1.0), Line::x_minus_t(-1.0)};
    case DataTag::Ex2:
    case DataTag::Ex3: {
      std::vector<Line> lines;
      for (double c : {0.5, 1.0, 1.5, 2.0, 2.5}) lines.push_back(Line::x_plus_t(c));
      for (double c : {-1.5, -1.0, -0.5, 0.0, 0.5}) lines.push_back(Line::x_minus_t(c));
      return lines;
    }
    default: break;
  }
  return {};
}

std::vector<double> exact_control_breaks(DataTag tag) {
  if (tag == DataTag::Ex2 || tag == DataTag::Ex3) return {0.5, 1.5};
  return {};
}

}  // namespace wavectrl
