#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mhd2d/dynamics.hpp"
#include "test_support.hpp"

using namespace mhd2d;
using testing_support::kSeed;
using testing_support::smooth_solenoidal;

namespace {

SolverConfig small_config(int n, double dt, double horizon) {
  SolverConfig c;
  c.nx = c.ny = n;
  c.dt = dt;
  c.horizon = horizon;
  return c;
}

double energy(const SimState& s) { return norm_sq(s.u) + norm_sq(s.b); }

}  // namespace

TEST(SolverConfig, RejectsInvalidValues) {
  SolverConfig c;
  c.dt = -1;
  c.Re = 0;
  try {
    c.validate();
    FAIL();
  } catch (const InputError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("time.dt"), std::string::npos);
    EXPECT_NE(m.find("Re"), std::string::npos);
  }
}

TEST(Compatibility, ResidualsAndPolicy) {
  Grid g(8, 8);
  BoundaryLayout l(g);
  auto zero = compatibility_check(VectorField(g), VectorField(g), BoundaryTrace::zero(g));
  EXPECT_TRUE(zero.pass());
  EXPECT_EQ(zero.div_u + zero.div_b + zero.u_trace + zero.b_trace, 0.0);

  auto u = curl_of_stream(g, [](double x, double y) { return x * x * (1 - x) * (1 - x) * y * y * (1 - y) * (1 - y); });
  auto r = compatibility_check(u, VectorField(g), BoundaryTrace::zero(g));
  EXPECT_LT(r.div_u, 1e-10);
  EXPECT_EQ(r.u_trace, 0.0);

  auto b = VectorField::sample(g, [](double, double) { return Vec2{1.0, 0.0}; });
  auto h = BoundaryTrace::constant(l, sample_trace(l, [](double, double) { return Vec2{0.25, 0.0}; }));
  auto bad = compatibility_check(VectorField(g), b, h);
  EXPECT_FALSE(bad.pass());
  EXPECT_NEAR(bad.b_trace, 0.75 * std::sqrt(kPerimeter), 1e-12);

  Integrator strict(small_config(8, 1e-2, 1e-2), h);
  EXPECT_THROW(strict.initial_state(VectorField(g), b), InputError);
  auto cfg = small_config(8, 1e-2, 1e-2);
  cfg.compatibility = CompatibilityPolicy::project;
  auto fixed = Integrator(cfg, h).initial_state(VectorField(g), b);
  EXPECT_TRUE(compatibility_check(fixed.u, fixed.b, h).pass());
}

TEST(MagneticStep, HeatEigenmodeOracle) {
  Grid g(16, 16);
  const auto lap = build_laplacian_basis(g, 1);
  const double dt = 1e-3;
  Integrator integ(small_config(16, dt, dt), BoundaryTrace::zero(g));
  const VectorField b0 = lap.mode(0);
  auto [b1, rep] = integ.b_step(VectorField(g), b0, dt);
  EXPECT_LT(norm(b1 - (1.0 / (1.0 + lap.value(0) * dt)) * b0), 1e-8);
  EXPECT_EQ(rep.picard_iterations, 1);

  auto [z, zr] = integ.b_step(VectorField(g), VectorField(g), dt);
  EXPECT_EQ(norm_sq(z), 0.0);
  EXPECT_EQ(zr.picard_iterations, 1);
}

TEST(MagneticStep, StableWithoutBoundaryData) {
  Grid g(16, 16);
  std::mt19937_64 rng(kSeed);
  Integrator integ(small_config(16, 1e-2, 1e-2), BoundaryTrace::zero(g));
  for (int k = 0; k < 5; ++k) {
    auto u = smooth_solenoidal(g, rng, 20.0);
    auto b = smooth_solenoidal(g, rng, 5.0);
    EXPECT_LE(norm(integ.b_step(u, b, 1e-2).first), norm(b));
  }
}

TEST(MagneticStep, PicardContractsAcrossSeeds) {
  Grid g(16, 16);
  for (unsigned seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(kSeed + seed);
    auto u = smooth_solenoidal(g, rng, 10.0);
    auto b = smooth_solenoidal(g, rng, 2.0);
    double prev = 1.0;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
      Integrator integ(small_config(16, dt, dt), BoundaryTrace::zero(g));
      auto rep = integ.b_step(u, b, dt).second;
      EXPECT_GT(rep.contraction, 0.0) << seed;
      EXPECT_LT(rep.contraction, 1.0) << seed;
      EXPECT_LE(rep.contraction, 1.05 * prev) << seed << ' ' << dt;
      prev = rep.contraction;
    }
  }
}

TEST(MagneticStep, CarriesTheBoundaryTrace) {
  Grid g(16, 16);
  BoundaryLayout l(g);
  BoundaryModel m({{1.0, 2, 0, {EnvelopeKind::sinusoidal, 1.0}}});
  auto tr = m.sample(l, uniform_times(1e-2, 10));
  Integrator integ(small_config(16, 1e-2, 0.1), tr);
  std::mt19937_64 rng(kSeed);
  auto b = integ.b_step(smooth_solenoidal(g, rng), VectorField(g), 0.05).first;
  EXPECT_LT(trace_residual(b, l, tr.at(0.05)), 1e-14);
}

TEST(VelocityStep, SingleModeOracle) {
  Grid g(12, 12);
  const double dt = 1e-3;
  auto basis = std::make_shared<const SpectralBasis>(build_stokes_basis(g, 4));
  auto cfg = small_config(12, dt, dt);
  const VectorField xi = basis->mode(0);
  const double expect = 1.0 / (1.0 + basis->value(0) * dt);
  for (bool truncated : {true, false}) {
    if (truncated) cfg.truncation = 4;
    else cfg.truncation.reset();
    Integrator integ(cfg, BoundaryTrace::zero(g), basis);
    auto [u, p] = integ.u_step(VectorField(g), xi, xi, dt);
    EXPECT_NEAR(dot(xi, u), expect, 1e-8) << truncated;
    EXPECT_NEAR(p.mean(), 0.0, 1e-12);
    auto [z, zp] = integ.u_step(VectorField(g), VectorField(g), VectorField(g), dt);
    EXPECT_EQ(norm_sq(z), 0.0);
  }
}

TEST(VelocityStep, FullTruncationMatchesUntruncatedSolve) {
  Grid g(6, 6);
  const int all = g.interior_nodes();
  auto basis = std::make_shared<const SpectralBasis>(build_stokes_basis(g, all));
  auto cfg = small_config(6, 1e-2, 1e-2);
  Integrator full(cfg, BoundaryTrace::zero(g));
  cfg.truncation = all;
  Integrator trunc(cfg, BoundaryTrace::zero(g), basis);
  std::mt19937_64 rng(kSeed);
  for (int k = 0; k < 3; ++k) {
    auto u = testing_support::random_solenoidal(g, rng);
    auto b = testing_support::random_scalar_field_vector(g, rng);
    auto a = full.u_step(b, u, u, 1e-2).first;
    auto c = trunc.u_step(b, u, u, 1e-2).first;
    EXPECT_LT(norm(a - c), 1e-8 * (1.0 + norm(a)));
    EXPECT_LT(divergence(a).max_abs(), 1e-9);
    EXPECT_LT(divergence(c).max_abs(), 1e-9);
  }
}

TEST(CoupledStep, ZeroStateStaysZero) {
  Grid g(8, 8);
  Integrator integ(small_config(8, 1e-2, 0.05), BoundaryTrace::zero(g));
  std::vector<StepReport> reports;
  auto end = integ.advance(integ.initial_state(VectorField(g), VectorField(g)), {}, &reports);
  EXPECT_EQ(reports.size(), 5u);
  EXPECT_EQ(energy(end), 0.0);
  EXPECT_DOUBLE_EQ(end.t, 0.05);
}

// Smooth-in-time state: the initial transient is run off first, so that the
// step comparisons below see the asymptotic rates.
SimState warmed_state(const Grid& g) {
  std::mt19937_64 rng(kSeed);
  auto u0 = smooth_solenoidal(g, rng, 5.0);
  auto b0 = smooth_solenoidal(g, rng, 5.0);
  Integrator warm(small_config(g.nx(), 1e-3, 0.05), BoundaryTrace::zero(g));
  auto s = warm.advance(warm.initial_state(u0, b0));
  s.t = 0.0;
  return s;
}

TEST(CoupledStep, SinglePassAgreesToSecondOrder) {
  Grid g(16, 16);
  const SimState start = warmed_state(g);
  auto diff = [&](double dt) {
    auto cfg = small_config(16, dt, dt);
    auto fixed = Integrator(cfg, BoundaryTrace::zero(g)).coupled_step(start).first;
    cfg.coupling = Coupling::single_pass;
    auto single = Integrator(cfg, BoundaryTrace::zero(g)).coupled_step(start).first;
    return std::sqrt(norm_sq(fixed.u - single.u) + norm_sq(fixed.b - single.b));
  };
  const double d1 = diff(1e-3), d2 = diff(5e-4);
  EXPECT_GT(d1, 0.0);
  EXPECT_GE(d1 / d2, 3.5);
}

TEST(CoupledStep, HomogeneousEnergyLaw) {
  // E = |u|^2 + |b|^2 so that dE/dt + 2(|grad u|^2 + |grad b|^2) = 0 exactly in
  // continuous time; implicit Euler leaves a nonpositive O(dt) margin.
  Grid g(16, 16);
  const SimState start = warmed_state(g);
  auto last_margin = [&](double dt) {
    Integrator integ(small_config(16, dt, 0.02), BoundaryTrace::zero(g));
    std::vector<double> e, m;
    SimState prev(g);
    integ.advance(start, [&](const SimState& s, const StepReport* r) {
      if (r) m.push_back((energy(s) - energy(prev)) / dt + 2.0 * (grad_norm_sq(s.u) + grad_norm_sq(s.b)));
      e.push_back(energy(s));
      prev = s;
    });
    for (std::size_t k = 1; k < e.size(); ++k) EXPECT_LT(e[k], e[k - 1]);
    for (double x : m) EXPECT_LE(x, 1e-8 * e.front());
    return m.back();
  };
  const double m1 = last_margin(2e-3), m2 = last_margin(1e-3);
  EXPECT_LT(m1, 0.0);
  EXPECT_NEAR(m1 / m2, 2.0, 0.3);
}

TEST(Run, RestartIsBitIdentical) {
  Grid g(12, 12);
  BoundaryLayout l(g);
  BoundaryModel m({{0.5, 2, 0, {EnvelopeKind::ramp, 10.0}}});
  const double dt = 5e-3;
  auto tr = m.sample(l, uniform_times(dt, 20));
  auto cfg = small_config(12, dt, 0.1);
  std::mt19937_64 rng(kSeed);
  auto u0 = smooth_solenoidal(g, rng, 3.0);
  auto b0 = smooth_solenoidal(g, rng, 3.0);

  Integrator full(cfg, tr);
  const SimState direct = full.advance(full.initial_state(u0, b0));

  auto half_cfg = cfg;
  half_cfg.horizon = 0.05;
  Integrator first(half_cfg, tr);
  const SimState mid = first.advance(first.initial_state(u0, b0));
  const auto path = std::filesystem::temp_directory_path() / "mhd2d_restart_test" / "mid.ckpt";
  write_checkpoint(path, mid, cfg);
  const SimState resumed = full.advance(read_checkpoint(path, cfg));
  EXPECT_TRUE(resumed == direct);
  EXPECT_EQ(resumed.t, direct.t);

  auto other = cfg;
  other.dt = 1e-2;
  EXPECT_THROW(read_checkpoint(path, other), InputError);
  std::filesystem::remove_all(path.parent_path());
}

TEST(Run, DivergenceStaysClean) {
  Grid g(16, 16);
  BoundaryLayout l(g);
  BoundaryModel m({{1.0, 2, 0, {EnvelopeKind::sinusoidal, 2.0}}, {0.5, 4, 1, {EnvelopeKind::sinusoidal, 1.0}}});
  auto tr = m.sample(l, uniform_times(1e-2, 10));
  auto cfg = small_config(16, 1e-2, 0.1);
  cfg.div_clean_threshold = 1e-10;
  Integrator integ(cfg, tr);
  std::mt19937_64 rng(kSeed);
  integ.advance(integ.initial_state(smooth_solenoidal(g, rng, 3.0), VectorField(g)),
                [&](const SimState& s, const StepReport*) {
                  EXPECT_LT(divergence(s.u).max_abs(), 1e-9);
                  EXPECT_LT(divergence(s.b).max_abs(), 1e-9);
                  EXPECT_LT(trace_residual(s.b, l, tr.at(s.t)), 1e-12);
                  EXPECT_LT(std::abs(s.p.mean()), 1e-12);
                });
}
