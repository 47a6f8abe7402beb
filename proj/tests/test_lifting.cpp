#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mhd2d/lifting.hpp"
#include "mhd2d/spectral.hpp"

using namespace mhd2d;
using std::numbers::pi;

namespace {

double harmonic_poly_error(int n) {
  Grid g(n, n);
  BoundaryLayout l(g);
  auto f = [](double x, double y) { return Vec2{x * x - y * y, 2 * x * y}; };
  HarmonicExtender ext(g);
  auto he = ext.extend(l, sample_trace(l, f));
  auto ref = VectorField::sample(g, f);
  double err = 0.0;
  for (int c = 0; c < 2; ++c) {
    auto a = he.comp(c);
    auto b = ref.comp(c);
    for (std::size_t k = 0; k < a.size(); ++k) err = std::max(err, std::abs(a[k] - b[k]));
  }
  return err;
}

BoundaryTrace oscillatory_trace(const Grid& g, double dt, double horizon) {
  BoundaryLayout l(g);
  BoundaryModel m({{0.5, 2, 0, {EnvelopeKind::sinusoidal, 2.0}}, {0.3, 4, 1, {EnvelopeKind::sinusoidal, 1.0}}});
  return m.sample(l, uniform_times(dt, static_cast<int>(std::lround(horizon / dt))));
}

}  // namespace

TEST(HarmonicExtend, ZeroAndLinearData) {
  Grid g(12, 12);
  BoundaryLayout l(g);
  HarmonicExtender ext(g);
  EXPECT_EQ(norm_sq(ext.extend(l, zero_trace(l))), 0.0);
  auto lin = [](double x, double y) { return Vec2{x, 2 - y + 0.5 * x}; };
  auto he = ext.extend(l, sample_trace(l, lin));
  EXPECT_LT(norm(he - VectorField::sample(g, lin)), 1e-12);
}

TEST(HarmonicExtend, SecondOrderOnHarmonicPolynomial) {
  const double e16 = harmonic_poly_error(16), e32 = harmonic_poly_error(32), e64 = harmonic_poly_error(64);
  EXPECT_GE(e16 / e32, 3.5);
  EXPECT_GE(e32 / e64, 3.5);
}

TEST(HarmonicExtend, MaximumPrincipleAndLinearity) {
  Grid g(16, 16);
  BoundaryLayout l(g);
  HarmonicExtender ext(g);
  TraceValues h1(l.count(), 2), h2(l.count(), 2);
  for (int k = 0; k < l.count(); ++k) {
    h1(k, 0) = std::sin(0.7 * k);
    h1(k, 1) = (k % 5) * 0.25;
    h2(k, 0) = std::cos(k * k * 0.1);
    h2(k, 1) = -1.0 + 0.01 * k;
  }
  auto e1 = ext.extend(l, h1);
  for (int c = 0; c < 2; ++c) {
    const double lo = h1.col(c).minCoeff(), hi = h1.col(c).maxCoeff();
    for (double v : e1.comp(c)) {
      EXPECT_GE(v, lo - 1e-12);
      EXPECT_LE(v, hi + 1e-12);
    }
  }
  auto combo = ext.extend(l, 2.0 * h1 - 3.0 * h2);
  auto sum = 2.0 * e1 - 3.0 * ext.extend(l, h2);
  EXPECT_LT(norm(combo - sum), 1e-11 * norm(combo));
}

TEST(ParabolicLift, TrivialCases) {
  Grid g(8, 8);
  BoundaryLayout l(g);
  auto zero = parabolic_lift(VectorField(g), BoundaryTrace::zero(g), 0.01, 0.05);
  ASSERT_EQ(zero.states.size(), 6u);
  for (const auto& s : zero.states) EXPECT_EQ(norm_sq(s), 0.0);

  auto cf = [](double, double) { return Vec2{0.7, -0.2}; };
  auto c = VectorField::sample(g, cf);
  auto run = parabolic_lift(c, BoundaryTrace::constant(l, sample_trace(l, cf)), 0.01, 0.05);
  for (const auto& s : run.states) EXPECT_LT(norm(s - c), 1e-12);
}

TEST(ParabolicLift, CompatibilityPolicy) {
  Grid g(8, 8);
  BoundaryLayout l(g);
  auto b0 = VectorField::sample(g, [](double, double) { return Vec2{1.0, 0.0}; });
  EXPECT_THROW(parabolic_lift(b0, BoundaryTrace::zero(g), 0.01, 0.02), InputError);
  auto run = parabolic_lift(b0, BoundaryTrace::zero(g), 0.01, 0.02, CompatibilityPolicy::project);
  EXPECT_LT(trace_residual(run.states.front(), l, zero_trace(l)), 1e-15);
}

TEST(ParabolicLift, DecayMatchesFirstLaplacianEigenvalue) {
  Grid g(32, 32);
  const double mu1 = build_laplacian_basis(g, 1).value(0);
  auto b0 = VectorField::sample(g, [](double x, double y) { return Vec2{std::sin(pi * x) * std::sin(pi * y), 0.0}; });
  b0.clear_boundary();
  auto run = parabolic_lift(b0, BoundaryTrace::zero(g), 1e-4, 0.1);
  const double ratio = norm(run.states.back()) / norm(b0);
  EXPECT_NEAR(ratio / std::exp(-mu1 * 0.1), 1.0, 0.01);
  for (std::size_t k = 1; k < run.states.size(); ++k)
    EXPECT_LE(norm_sq(run.states[k]), norm_sq(run.states[k - 1]));
}

TEST(LiftingEstimate, ZeroScalingAndResolution) {
  auto zero = lifting_estimate_check(BoundaryTrace::zero(Grid(8, 8)));
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.derivative, 0.0);

  auto ratios = [](int n, double amp) {
    Grid g(n, n);
    BoundaryLayout l(g);
    BoundaryModel m({{amp, 2, 0, {EnvelopeKind::sinusoidal, 1.0}}});
    return lifting_estimate_check(m.sample(l, uniform_times(0.05, 10)));
  };
  auto a = ratios(16, 1.0), b = ratios(16, 2.0), c = ratios(32, 1.0);
  EXPECT_NEAR(a.value, b.value, 1e-10 * a.value);
  EXPECT_NEAR(a.derivative, b.derivative, 1e-10 * a.derivative);
  EXPECT_GT(a.value, 0.0);
  EXPECT_LT(std::max(a.value, c.value) / std::min(a.value, c.value), 2.0);
  EXPECT_LT(std::max(a.derivative, c.derivative) / std::min(a.derivative, c.derivative), 2.0);
}

TEST(ParabolicEstimate, HomogeneousAndConstantData) {
  Grid g(16, 16);
  BoundaryLayout l(g);
  auto b0 = VectorField::sample(g, [](double x, double y) { return Vec2{x * (1 - x) * y * (1 - y), std::sin(pi * x) * std::sin(pi * y)}; });
  b0.clear_boundary();
  auto zero = BoundaryTrace::zero(g);
  auto est = parabolic_estimate_check(parabolic_lift(b0, zero, 1e-3, 0.05), zero);
  for (double m : est.weak.margins(0.0)) EXPECT_LE(m, 1e-12);
  for (double m : est.strong.margins(0.0)) EXPECT_LE(m, 1e-12);

  auto cf = [](double, double) { return Vec2{0.4, 1.1}; };
  auto trc = BoundaryTrace::constant(l, sample_trace(l, cf));
  auto c = VectorField::sample(g, cf);
  auto ce = parabolic_estimate_check(parabolic_lift(c, trc, 1e-3, 0.05), trc);
  for (double m : ce.weak.margins(1.0)) EXPECT_LE(m, 1e-12);
  EXPECT_NEAR(ce.weak.lhs.back(), norm_sq(c), 1e-12);
}

TEST(ParabolicEstimate, CalibratedConstantCoversOscillatoryData) {
  // The weak constant is dominated by the first steps, where the boundary
  // layer is thinner than a cell, and grows as dt shrinks. It is therefore
  // calibrated on a ramped reference trace at the finest step in use.
  Grid g(16, 16);
  BoundaryLayout l(g);
  BoundaryModel ramp({{1.0, 2, 0, {EnvelopeKind::ramp, 20.0}}, {0.5, 6, 1, {EnvelopeKind::ramp, 20.0}}});
  const auto ref_trace = ramp.sample(l, uniform_times(1e-4, 2000));
  auto ref = parabolic_estimate_check(parabolic_lift(VectorField(g), ref_trace, 1e-4, 0.2), ref_trace);
  const double cw = 2.0 * ref.weak.required_constant(), cs = 2.0 * ref.strong.required_constant();
  ASSERT_TRUE(std::isfinite(cw) && std::isfinite(cs));
  for (double dt : {1e-3, 1e-4}) {
    const auto tr = oscillatory_trace(g, dt, 0.2);
    auto e = parabolic_estimate_check(parabolic_lift(VectorField(g), tr, dt, 0.2), tr);
    for (double m : e.weak.margins(cw)) EXPECT_LE(m, 0.0) << dt;
    for (double m : e.strong.margins(cs)) EXPECT_LE(m, 0.0) << dt;
  }
}
