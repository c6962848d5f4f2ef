#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wavectrl/analysis.hpp"
#include "wavectrl/error.hpp"
#include "wavectrl/problems.hpp"

using namespace wavectrl;

namespace {
const double kPi = std::acos(-1.0);
}

TEST(Cutoff, SmoothValues) {
  const Cutoff c = make_cutoff(2.5, 0.1, 0.4);
  EXPECT_NEAR(c.chi0(1.25), 1.0, 1e-15);
  EXPECT_NEAR(c.chi1(0.25), 1.0, 1e-15);
  EXPECT_EQ(c.chi1(0.05), 0.0);
  EXPECT_EQ(c.chi1(0.4), 0.0);
  EXPECT_EQ(c.chi1(0.1 + 1e-16), 0.0);
  EXPECT_EQ(c.chi0(0.0), 0.0);
  EXPECT_EQ(c.chi0(2.5), 0.0);
  for (int i = 0; i <= 2000; ++i) {
    const double s = i / 2000.0;
    EXPECT_GE(c.chi0(2.5 * s), 0.0);
    EXPECT_LE(c.chi0(2.5 * s), 1.0 + 1e-15);
    EXPECT_GE(c.chi1(s), 0.0);
    EXPECT_LE(c.chi1(s), 1.0 + 1e-15);
  }
  EXPECT_NEAR(c(Point(1.25, 0.25)), 1.0, 1e-15);
}

TEST(Cutoff, Variants) {
  const Cutoff one = make_trivial_cutoff();
  EXPECT_TRUE(one.is_one());
  EXPECT_EQ(one(Point(0.3, 0.7)), 1.0);
  const Cutoff ind = Cutoff::indicator(0.1, 0.4);
  EXPECT_EQ(ind.chi0(0.0), 1.0);
  EXPECT_EQ(ind.chi1(0.2), 1.0);
  EXPECT_EQ(ind.chi1(0.5), 0.0);
  EXPECT_EQ(ind.volume_breaks().size(), 2u);
  EXPECT_THROW(Cutoff::smooth(2.0, 0.5, 0.4), InvalidArgument);
}

TEST(Cutoff, BoundarySides) {
  const Cutoff c = Cutoff::smooth(2.0, 0.1, 0.4);
  EXPECT_TRUE(c.controls(BoundarySide::Right));
  EXPECT_FALSE(c.controls(BoundarySide::Left));
  EXPECT_EQ(c.on_boundary(1.0, BoundarySide::Left), 0.0);
  EXPECT_NEAR(c.on_boundary(1.0, BoundarySide::Right), 1.0, 1e-15);
  const Cutoff both = c.with_control_sides(true, true);
  EXPECT_NEAR(both.on_boundary(1.0, BoundarySide::Left), 1.0, 1e-15);
}

TEST(InitialData, Profiles) {
  const InitialData ex1 = make_initial_data(DataTag::Ex1);
  EXPECT_NEAR(ex1.u0(0.5), 1.0, 1e-15);
  EXPECT_NEAR(ex1.u0(0.0), 0.0, 1e-15);
  EXPECT_NEAR(ex1.u0(1.0), 0.0, 1e-15);
  const InitialData ex2 = make_initial_data(DataTag::Ex2);
  EXPECT_NEAR(ex2.u0(0.25), 1.0, 1e-15);
  EXPECT_NEAR(ex2.u0(0.5), 2.0, 1e-15);
  EXPECT_NEAR(ex2.u0(0.75), 1.0, 1e-15);
  const InitialData ex3 = make_initial_data(DataTag::Ex3);
  EXPECT_NEAR(ex3.u0(0.25), 1.0, 1e-15);
  EXPECT_EQ(ex3.u0(0.75), 0.0);
  const InitialData rough = make_initial_data(DataTag::RoughIndicator);
  EXPECT_EQ(rough.u0(0.5), 0.0);
  EXPECT_EQ(rough.u1(0.5), 1.0);
  EXPECT_EQ(rough.u1(0.3), 0.0);
  EXPECT_TRUE(make_initial_data(DataTag::Zero).is_zero());
  EXPECT_EQ(parse_data_tag("Ex2b"), DataTag::Ex2b);
  EXPECT_THROW(parse_data_tag("Ex9"), InvalidArgument);
}

TEST(InitialData, Ex2b) {
  const InitialData d = make_ex2b_data();
  EXPECT_NEAR(d.u0(0.0), 0.0, 1e-15);
  EXPECT_NEAR(d.u0(1.0), 0.0, 1e-15);
  EXPECT_NEAR(d.u0(0.5), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(ex2b_bump(0.5), 1.0, 1e-15);
  // C1 across the kink of the Ex2 profile
  const double e = 1e-5;
  const double left = (d.u0(0.5) - d.u0(0.5 - e)) / e;
  const double right = (d.u0(0.5 + e) - d.u0(0.5)) / e;
  EXPECT_NEAR(left, right, 1e-4);
  EXPECT_NEAR(left, 4.0, 1e-3);
  EXPECT_EQ(d.u1(0.3), 0.0);
}

TEST(Exact, Ex1Values) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ut(0.0, 2.0), ux(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng), x = ux(rng);
    const ExactValues e = exact_eval(DataTag::Ex1, t, x);
    EXPECT_NEAR(e.phi, -std::sin(kPi * t) * std::sin(kPi * x) / (2 * kPi), 1e-14);
    // box phi = 0: phi_tt = phi_xx = -pi^2 phi
    const double d = 1e-4;
    const double phi_tt = (exact_eval(DataTag::Ex1, t + d, x).phi - 2 * e.phi + exact_eval(DataTag::Ex1, t - d, x).phi) / (d * d);
    const double phi_xx = (exact_eval(DataTag::Ex1, t, x + d).phi - 2 * e.phi + exact_eval(DataTag::Ex1, t, x - d).phi) / (d * d);
    EXPECT_NEAR(phi_tt - phi_xx, 0.0, 1e-6);
    if (x - t < -1.0) EXPECT_EQ(e.u, 0.0);
  }
  EXPECT_NEAR(exact_control(DataTag::Ex1, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(exact_eval(DataTag::Ex1, 0.0, 0.5).u, 1.0, 1e-14);
}

TEST(Exact, Ex1TerminalStateVanishes) {
  for (double x = 0.0; x <= 1.0; x += 0.05) EXPECT_NEAR(exact_eval(DataTag::Ex1, 2.0 - 1e-13, x).u, 0.0, 1e-10);
}

TEST(Exact, Ex3TraceIdentity) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = ut(rng);
    if (std::abs(t - 0.5) < 1e-9 || std::abs(t - 1.5) < 1e-9) continue;
    EXPECT_NEAR(ex3_adjoint_dx(t, 1.0), exact_control(DataTag::Ex3, t), 1e-12);
    const double v = (t > 0.5 && t < 1.5) ? 2.0 * (1.0 - t) : 0.0;
    EXPECT_NEAR(exact_control(DataTag::Ex3, t), v, 1e-12);
  }
}

TEST(Exact, Ex3ContinuousAcrossCharacteristics) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  const double e = 1e-9;
  int checked = 0;
  for (const Line& l : exact_solution_breaks(DataTag::Ex3)) {
    if (l.normal(0) == 0.0 || l.normal(1) == 0.0) continue;
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      // point on the line normal . (t, x) = offset
      const double x = (l.offset - l.normal(0) * t) / l.normal(1);
      if (x <= 2 * e || x >= 1.0 - 2 * e) continue;
      const Point p(t, x);
      const Point n = l.normal.normalized();
      const Point a = p + e * n, b = p - e * n;
      EXPECT_NEAR(ex3_adjoint(a(0), a(1)), ex3_adjoint(b(0), b(1)), 1e-8);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Exact, Ex2ControlContinuousAtThreeHalves) {
  EXPECT_NEAR(exact_control(DataTag::Ex2, 1.5 - 1e-12), exact_control(DataTag::Ex2, 1.5 + 1e-12), 1e-10);
  EXPECT_NEAR(exact_control(DataTag::Ex2, 2.0 - 1e-14), 0.0, 1e-10);
}

TEST(Exact, Norms) {
  const ExactNorms ex1 = exact_norms(DataTag::Ex1);
  EXPECT_NEAR(ex1.v, 0.5, 1e-6);
  EXPECT_NEAR(ex1.phi, 1.0 / (2.0 * std::sqrt(2.0) * kPi), 1e-6);
  EXPECT_NEAR(ex1.dx_phi, 1.0 / (2.0 * std::sqrt(2.0)), 1e-6);
  EXPECT_NEAR(ex1.u, 0.5, 1e-6);
  const ExactNorms ex3 = exact_norms(DataTag::Ex3);
  EXPECT_NEAR(ex3.v, 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_NEAR(ex3.u, 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_THROW(exact_norms(DataTag::Ex2b), InvalidArgument);
}
