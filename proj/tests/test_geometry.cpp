#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mhd2d/linalg.hpp"
#include "test_support.hpp"

using namespace mhd2d;
using std::numbers::pi;

namespace {

double max_interior_error_div(int n) {
  Grid g(n, n);
  auto v = VectorField::sample(g, [](double x, double) { return Vec2{std::sin(pi * x), 0.0}; });
  auto d = divergence(v);
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto p = ScalarField::position(g, i, j);
      err = std::max(err, std::abs(d(i, j) - pi * std::cos(pi * p.x)));
    }
  return err;
}

double lap_sinsin_error(int n) {
  Grid g(n, n);
  auto f = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  auto s = ScalarField::sample(g, f);
  auto l = laplacian(s, ScalarClosure::sample(g, f));
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto p = ScalarField::position(g, i, j);
      err = std::max(err, std::abs(l(i, j) + 2 * pi * pi * f(p.x, p.y)));
    }
  return err;
}

double convect_error(int n) {
  Grid g(n, n);
  auto a = VectorField::sample(g, [](double, double) { return Vec2{1.0, 0.0}; });
  auto f = VectorField::sample(g, [](double x, double) { return Vec2{std::sin(pi * x), 0.0}; });
  auto r = convect(a, f);
  double err = 0.0;
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) err = std::max(err, std::abs(r.x(i, j) - pi * std::cos(pi * i * g.dx())));
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) err = std::max(err, std::abs(r.y(i, j)));
  return err;
}

IdentityResiduals smooth_identities(int n) {
  Grid g(n, n);
  auto b = VectorField::sample(g, [](double x, double y) { return Vec2{std::sin(pi * y), std::sin(pi * x)}; });
  auto u = VectorField::sample(
      g, [](double x, double y) { return Vec2{std::cos(pi * x) * std::sin(2 * y), std::exp(x) * std::cos(y)}; });
  return identity_residuals(b, u);
}

}  // namespace

TEST(Grid, RejectsTinyGrids) {
  EXPECT_THROW(Grid(3, 8), ShapeError);
  Grid g(8, 5);
  EXPECT_EQ(g.dx() * 8, 1.0);
  EXPECT_EQ(g.dy() * 5, 1.0);
}

TEST(Divergence, ConstantAndLinearFieldsAreExact) {
  Grid g(9, 7);
  auto c = VectorField::sample(g, [](double, double) { return Vec2{1.0, 1.0}; });
  EXPECT_EQ(divergence(c).max_abs(), 0.0);
  auto l = VectorField::sample(g, [](double x, double y) { return Vec2{x, -y}; });
  EXPECT_LT(divergence(l).max_abs(), 1e-12);
}

TEST(Divergence, SecondOrderOnSine) {
  const double e32 = max_interior_error_div(32), e64 = max_interior_error_div(64);
  EXPECT_GE(e32 / e64, 3.5);
}

TEST(Gradient, ConstantAndLinear) {
  Grid g(8, 8);
  auto c = ScalarField::sample(g, [](double, double) { return 3.0; });
  EXPECT_EQ(norm_sq(gradient(c)), 0.0);
  auto s = ScalarField::sample(g, [](double x, double) { return x; });
  auto v = gradient(s);
  for (int i = 1; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_NEAR(v.x(i, j), 1.0, 1e-12);
  for (int i = 0; i < 8; ++i)
    for (int j = 1; j < 8; ++j) EXPECT_NEAR(v.y(i, j), 0.0, 1e-12);
}

TEST(Gradient, AdjointOfDivergence) {
  std::mt19937_64 rng(testing_support::kSeed);
  Grid g(11, 9);
  for (int trial = 0; trial < 5; ++trial) {
    auto s = testing_support::random_scalar(g, rng);
    auto v = testing_support::random_zero_trace(g, rng);
    const double lhs = dot(gradient(s), v);
    const double rhs = -dot(s, divergence(v));
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * (std::abs(lhs) + 1.0));
  }
}

TEST(Laplacian, LinearAndQuadratic) {
  Grid g(10, 10);
  auto lin = [](double x, double y) { return 2 * x - 3 * y + 1; };
  auto l1 = laplacian(ScalarField::sample(g, lin), ScalarClosure::sample(g, lin));
  EXPECT_LT(l1.max_abs(), 1e-10);
  auto quad = [](double x, double) { return x * x; };
  auto l2 = laplacian(ScalarField::sample(g, quad), ScalarClosure::sample(g, quad));
  for (int i = 1; i < 9; ++i)
    for (int j = 0; j < 10; ++j) EXPECT_NEAR(l2(i, j), 2.0, 1e-9);
  auto vl = laplacian(VectorField::sample(g, [](double x, double y) { return Vec2{x + y, 1 - x}; }));
  EXPECT_LT(norm(vl), 1e-10);
}

TEST(Laplacian, MissingClosureIsRejected) {
  Grid g(8, 8);
  ScalarClosure bad;
  EXPECT_THROW(laplacian(ScalarField(g), bad), ContractViolation);
}

TEST(Laplacian, SecondOrderOnProductSine) {
  EXPECT_GE(lap_sinsin_error(32) / lap_sinsin_error(64), 3.5);
}

TEST(Laplacian, SymmetricNegativeDefiniteWithExactEnergy) {
  std::mt19937_64 rng(testing_support::kSeed + 1);
  Grid g(9, 12);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = testing_support::random_zero_trace(g, rng);
    auto h = testing_support::random_zero_trace(g, rng);
    const double fh = dot(laplacian(f), h), hf = dot(f, laplacian(h));
    EXPECT_LT(std::abs(fh - hf), 1e-10 * std::abs(fh));
    const double ff = dot(laplacian(f), f);
    EXPECT_LT(ff, 0.0);
    EXPECT_NEAR(-ff, grad_norm_sq(f), 1e-10 * std::abs(ff));
  }
}

TEST(Convect, ZeroAdvectionGivesZero) {
  Grid g(8, 8);
  std::mt19937_64 rng(testing_support::kSeed + 2);
  auto f = testing_support::random_zero_trace(g, rng);
  EXPECT_EQ(norm_sq(convect(VectorField(g), f)), 0.0);
}

TEST(Convect, SkewSymmetricForDivergenceFreeAdvection) {
  std::mt19937_64 rng(testing_support::kSeed + 3);
  Grid g(12, 10);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = testing_support::random_solenoidal(g, rng);
    ASSERT_LT(divergence(a).max_abs(), 1e-10);
    auto f = testing_support::random_zero_trace(g, rng);
    auto h = testing_support::random_zero_trace(g, rng);
    EXPECT_LT(std::abs(dot(convect(a, f), f)), 1e-10);
    EXPECT_LT(std::abs(dot(convect(a, f), h) + dot(convect(a, h), f)), 1e-10);
  }
}

TEST(Convect, SecondOrderOnSine) {
  EXPECT_GE(convect_error(32) / convect_error(64), 3.5);
}

TEST(Convect, AssembledMatchesApplied) {
  std::mt19937_64 rng(testing_support::kSeed + 4);
  Grid g(7, 9);
  auto a = testing_support::random_scalar_field_vector(g, rng);
  auto f = testing_support::random_scalar_field_vector(g, rng);
  FaceDofs dofs(g);
  auto op = assemble_convect(dofs, a, f);
  Vec x;
  dofs.gather(f, x);
  Vec y = op.A * x + op.shift;
  Vec ref;
  dofs.gather(convect(a, f), ref);
  EXPECT_LT((y - ref).norm(), 1e-10 * ref.norm());
  auto lop = assemble_laplacian(dofs, f);
  dofs.gather(laplacian(f), ref);
  EXPECT_LT((lop.A * x + lop.shift - ref).norm(), 1e-10 * ref.norm());
}

TEST(Identities, TrivialFields) {
  Grid g(16, 16);
  auto r0 = identity_residuals(VectorField(g), VectorField(g));
  EXPECT_EQ(r0.lorentz, 0.0);
  EXPECT_EQ(r0.curl_curl, 0.0);
  EXPECT_EQ(r0.induction, 0.0);
  auto c = VectorField::sample(g, [](double, double) { return Vec2{0.3, -1.2}; });
  EXPECT_LT(identity_residuals(c, VectorField(g)).lorentz, 1e-13);
}

TEST(Identities, SecondOrderOnSmoothFields) {
  auto r32 = smooth_identities(32), r64 = smooth_identities(64);
  EXPECT_GT(r64.lorentz, 0.0);
  EXPECT_GE(r32.lorentz / r64.lorentz, 3.5);
  EXPECT_GE(r32.curl_curl / r64.curl_curl, 3.5);
  EXPECT_GE(r32.induction / r64.induction, 3.5);
}

TEST(HessianNorm, EqualsLaplacianNormForZeroTraceFields) {
  std::mt19937_64 rng(testing_support::kSeed + 5);
  Grid g(9, 11);
  for (int trial = 0; trial < 3; ++trial) {
    auto f = testing_support::random_zero_trace(g, rng);
    const double lap = norm_sq(laplacian(f));
    EXPECT_NEAR(hessian_norm_sq(f), lap, 1e-10 * lap);
  }
  // Only the mixed derivative of x*y survives: 2 * 1^2 over the unit square.
  auto q = VectorField::sample(g, [](double x, double y) { return Vec2{x * y, 0.0}; });
  EXPECT_NEAR(hessian_norm_sq(q), 2.0, 1e-10);
}
