#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mhd2d/estimates.hpp"
#include "test_support.hpp"

using namespace mhd2d;
using std::numbers::pi;
using testing_support::kSeed;
using testing_support::smooth_solenoidal;

namespace {

SolverConfig config(int n, double dt, double horizon) {
  SolverConfig c;
  c.nx = c.ny = n;
  c.dt = dt;
  c.horizon = horizon;
  return c;
}

EnergyLedger run_ledger(const SolverConfig& cfg, const BoundaryTrace& tr, const VectorField& u0, const VectorField& b0,
                        bool strong) {
  Integrator integ(cfg, tr);
  auto s0 = integ.initial_state(u0, b0);
  Recorder rec(tr, cfg.dt, strong, s0.b);
  integ.advance(s0, rec.observer());
  return rec.take();
}

}  // namespace

TEST(Ledger, ZeroStateGivesZeroRow) {
  Grid g(8, 8);
  Recorder rec(BoundaryTrace::zero(g), 0.1, true, VectorField(g));
  const auto r = rec.record(SimState(g));
  LedgerRow zero;
  EXPECT_TRUE(r == zero);
  const auto csv = rec.ledger().csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("t,u_L2_sq,grad_u_L2_sq,Su_L2_sq"), 0u);
  EXPECT_NE(csv.find("lap_bhat_L2_sq"), std::string::npos);
  EXPECT_EQ(EnergyLedger(false).csv().find("bhat"), std::string::npos);
}

TEST(Ledger, StokesModeNorms) {
  Grid g(12, 12);
  auto basis = build_stokes_basis(g, 2);
  SimState s(g);
  s.u = basis.mode(0);
  Recorder rec(BoundaryTrace::zero(g), 0.1, false, VectorField(g));
  const auto r = rec.record(s);
  EXPECT_NEAR(r.u_L2_sq, 1.0, 1e-8);
  EXPECT_NEAR(r.grad_u_L2_sq, basis.value(0), 1e-8 * basis.value(0));
  EXPECT_NEAR(r.Su_L2_sq, basis.value(0) * basis.value(0), 1e-7 * basis.value(0) * basis.value(0));
}

TEST(Ledger, ConstantFieldHasNoShiftedPart) {
  Grid g(8, 8);
  BoundaryLayout l(g);
  auto f = [](double, double) { return Vec2{0.3, -1.2}; };
  SimState s(g);
  s.b = VectorField::sample(g, f);
  Recorder rec(BoundaryTrace::constant(l, sample_trace(l, f)), 0.1, false, s.b);
  const auto r = rec.record(s);
  EXPECT_LT(r.btilde_L2_sq, 1e-24);
  EXPECT_LT(r.grad_btilde_L2_sq, 1e-20);
  EXPECT_NEAR(r.h_L2_Gamma * r.h_L2_Gamma, kPerimeter * (0.09 + 1.44), 1e-10);
}

TEST(WeakEnergy, HomogeneousRunAndScaling) {
  Grid g(12, 12);
  std::mt19937_64 rng(kSeed);
  const auto u0 = smooth_solenoidal(g, rng, 3.0), b0 = smooth_solenoidal(g, rng, 3.0);
  auto led = run_ledger(config(12, 2e-3, 0.06), BoundaryTrace::zero(g), u0, b0, false);
  auto q = weak_energy_residual(led);
  for (double s : q.scaled) EXPECT_EQ(s, 0.0);
  for (double m : q.margins(0.0)) EXPECT_LE(m, 0.0);

  // Doubling the fields multiplies energy-homogeneous terms by 4.
  auto big = run_ledger(config(12, 2e-3, 0.06), BoundaryTrace::zero(g), 2.0 * u0, 2.0 * b0, false);
  auto qb = weak_energy_residual(big);
  for (std::size_t k = 0; k < q.lhs.size(); ++k) EXPECT_LE(qb.lhs[k], 0.0);
  EXPECT_GT(std::abs(qb.lhs[3]), 3.0 * std::abs(q.lhs[3]));
}

TEST(Gronwall, HomogeneousBoundReducesToInitialEnergy) {
  Grid g(12, 12);
  std::mt19937_64 rng(kSeed);
  auto led = run_ledger(config(12, 2e-3, 0.06), BoundaryTrace::zero(g), smooth_solenoidal(g, rng, 3.0),
                        smooth_solenoidal(g, rng, 3.0), false);
  auto gw = gronwall_weak(led, 5.0);
  const double e0 = led.front().u_L2_sq + led.front().b_L2_sq;
  for (std::size_t k = 0; k < gw.times.size(); ++k) {
    EXPECT_EQ(gw.phi[k], 0.0);
    EXPECT_EQ(gw.psi[k], e0);
  }
  EXPECT_TRUE(gw.holds());
}

TEST(Gronwall, ConstantBoundaryNormQuadrature) {
  Grid g(8, 8);
  BoundaryLayout l(g);
  BoundaryModel m({{0.4, 2, 0, {}}});
  auto tr = BoundaryTrace::constant(l, m.evaluate(l, 0.0));
  auto cfg = config(8, 0.01, 0.1);
  cfg.compatibility = CompatibilityPolicy::project;
  auto led = run_ledger(cfg, tr, VectorField(g), VectorField(g), false);
  const double c = 3.0;
  auto gw = gronwall_weak(led, c);
  const double h12 = led.front().h_H12_Gamma;
  for (std::size_t k = 0; k < gw.times.size(); ++k) {
    EXPECT_NEAR(gw.phi[k], c * std::pow(h12, 4) * gw.times[k], 1e-10);
    if (k > 0) {
      EXPECT_GE(gw.psi[k], gw.psi[k - 1]);
    }
  }
  EXPECT_EQ(gw.phi.front(), 0.0);
}

TEST(StrongEnergy, ZeroTrajectoryAndProductStructure) {
  Grid g(8, 8);
  auto led = run_ledger(config(8, 0.01, 0.05), BoundaryTrace::zero(g), VectorField(g), VectorField(g), true);
  auto q = strong_energy_residual(led);
  for (double m : q.margins(1.0)) EXPECT_LE(m, 0.0);
  auto gs = strong_energy(led, 1.0);
  for (double k : gs.K) EXPECT_EQ(k, 0.0);
  EXPECT_TRUE(gs.holds());

  std::mt19937_64 rng(kSeed);
  auto dec = run_ledger(config(12, 2e-3, 0.04), BoundaryTrace::zero(Grid(12, 12)),
                        smooth_solenoidal(Grid(12, 12), rng, 3.0), smooth_solenoidal(Grid(12, 12), rng, 3.0), true);
  auto gd = strong_energy(dec, 1.0);
  for (double k : gd.K) EXPECT_GT(k, 0.0);
  // Without boundary data the H1 energy decays: the inequality holds with K alone.
  auto qd = strong_energy_residual(dec);
  EXPECT_LE(qd.worst_margin(1.0), 0.0);
}

TEST(Absorbing, FormulaPropertiesAndArithmeticOracle) {
  AbsorbingConstants k{pi * pi, 3.0, 3.0, 1.5, 2.0};
  BoundaryWindows none;
  auto r0 = absorbing_radii(k, none, 10.0);
  EXPECT_EQ(r0.rho0, 0.0);
  EXPECT_TRUE(std::isinf(r0.t0));

  // Synthetic ledger; expected values from an independent numpy evaluation.
  EnergyLedger led;
  for (int i = 0; i <= 300; ++i) {
    LedgerRow r;
    r.t = i * 0.01;
    const double s = std::sin(2 * pi * r.t);
    r.h_H12_Gamma = 0.1 * (1 + s);
    r.dth_Hm12_Gamma = 0.2 * pi * std::abs(std::cos(2 * pi * r.t));
    r.hE_L2_sq = 0.01 * (1 + s) * (1 + s);
    led.append(r);
  }
  const auto w = boundary_windows(led);
  auto r = absorbing_radii(k, w, 5.0);
  EXPECT_NEAR(r.rho0, 0.7585217904468244, 1e-12);
  EXPECT_NEAR(r.rho1 / r.rho0, k.c_p + 1 + k.c_omega, 1e-14);
  EXPECT_NEAR(r.t0, 0.44812825818084107, 1e-12);
  EXPECT_EQ(r.t2, r.t0 + 1.0);
  EXPECT_EQ(absorbing_radii(k, w, 5.0).t0, r.t0);
}

TEST(Normality, DyadicWindows) {
  std::vector<double> t, zero, cst, pulses;
  for (int i = 0; i <= 400; ++i) {
    t.push_back(i * 0.005);
    zero.push_back(0.0);
    cst.push_back(2.0);
    const double x = i * 0.005;
    pulses.push_back((std::fmod(x, 0.5) < 0.05 || (x > 1.2 && x < 1.3)) ? 3.0 : 0.0);
  }
  EXPECT_EQ(normality_check(t, zero, 1e-3, 2), 1.0);
  // |h|^2 = 4: windows integrate to 4 eta; eps = 0.1 gives eta <= 0.025.
  EXPECT_EQ(normality_check(t, cst, 0.1, 2), 1.0 / 64);

  const double eps = 0.5;
  const double eta = normality_check(t, pulses, eps, 2);
  // Exhaustive scan over all window starts at the sampling resolution.
  auto scan = [&](double h) {
    std::vector<double> sq;
    for (double v : pulses) sq.push_back(v * v);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size() && t[i] + h <= t.back(); ++i)
      worst = std::max(worst, integrate_window(t, sq, t[i], t[i] + h));
    return worst;
  };
  ASSERT_GT(eta, 0.0);
  EXPECT_LE(scan(eta), eps);
  EXPECT_GT(scan(2 * eta), eps);
}

TEST(BrezisGallouet, ProductSineMatchesClosedForm) {
  Grid g(64, 64);
  auto f = [](double x, double y) { return Vec2{std::sin(pi * x) * std::sin(pi * y), 0.0}; };
  auto v = VectorField::sample(g, f);
  const double h1 = 0.25 + pi * pi / 2, h2 = h1 + std::pow(pi, 4);
  const double exact = 1.0 / (std::sqrt(h1) * std::sqrt(1 + std::log(h2 / h1)));
  EXPECT_NEAR(brezis_gallouet_ratio(v), exact, 0.01 * exact);
  EXPECT_NEAR(brezis_gallouet_ratio(3.5 * v), brezis_gallouet_ratio(v), 1e-10);
  EXPECT_THROW(brezis_gallouet_ratio(VectorField(g)), InputError);
}

TEST(StokesRegularity, ModesAndHomogeneity) {
  Grid g(16, 16);
  auto basis = build_stokes_basis(g, 3);
  LerayProjector leray(g);
  for (int i = 0; i < 3; ++i) {
    const auto xi = basis.mode(i);
    EXPECT_NEAR(std::sqrt(stokes_norm_sq(xi, leray)), basis.value(i), 1e-6 * basis.value(i));
    const double r = stokes_regularity_ratio(xi, leray);
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_NEAR(stokes_regularity_ratio(-2.0 * xi, leray), r, 1e-10 * r);
  }
  EXPECT_THROW(stokes_regularity_ratio(VectorField(g), leray), InputError);
}

TEST(Calibration, RoundTripAndErrors) {
  CalibrationStore s;
  s.set("weak_energy", 12.5, "ramp_reference");
  s.set("c_tilde", 0.1 + 0.2, "ramp_reference");
  auto back = CalibrationStore::parse(s.to_text());
  EXPECT_TRUE(back == s);
  EXPECT_EQ(back.get("c_tilde"), 0.1 + 0.2);
  EXPECT_THROW(back.get("nope"), InputError);
  EXPECT_THROW(CalibrationStore::parse("bad header\n"), InputError);
  EXPECT_THROW(CalibrationStore::parse(std::string(kCalibrationHeader) + "\nx 1.0\n"), InputError);
  EXPECT_THROW(s.set("x", std::numeric_limits<double>::infinity(), "r"), SolverError);
  EXPECT_EQ(kTheta, 0.5);
  EXPECT_EQ(kQ, 2.0);
  EXPECT_EQ(kQn, 4.0);
}
