#include <gtest/gtest.h>

#include "mhd2d/verify.hpp"
#include "test_support.hpp"

using namespace mhd2d;

namespace {

// Forcing values of the time-dependent manufactured solution (Re = Rm = S = 1)
// evaluated symbolically with sympy: {x, y, t, fu_x, fu_y, fb_x, fb_y}.
constexpr double kForcingOracle[][7] = {
    {0.3, 0.7, 0.0, -74.81233098615131, -128.32983912534013, 24.58946273106584, -3.536903662272444},
    {0.15, 0.4, 0.13, 8.679106731283543, -176.46672149810448, 5.169633069700515, 31.623175626159316},
    {0.9, 0.25, 0.31, -61.697715771639096, 63.21481075857609, 22.609433119374646, 10.455794222621858},
};

ExperimentContext context(ParamMap params = {}) {
  ExperimentContext c;
  c.seed = testing_support::kSeed;
  c.params = std::move(params);
  return c;
}

}  // namespace

TEST(Manufactured, ForcingMatchesSymbolicOracle) {
  Manufactured m;
  m.time_dependent = true;
  for (const auto& row : kForcingOracle) {
    const Vec2 fu = m.force_u(row[0], row[1], row[2]);
    const Vec2 fb = m.force_b(row[0], row[1], row[2]);
    EXPECT_NEAR(fu.x, row[3], 1e-10 * std::abs(row[3]));
    EXPECT_NEAR(fu.y, row[4], 1e-10 * std::abs(row[4]));
    EXPECT_NEAR(fb.x, row[5], 1e-10 * std::abs(row[5]));
    EXPECT_NEAR(fb.y, row[6], 1e-10 * std::abs(row[6]));
  }
}

TEST(Manufactured, DiscreteFieldsAreDivergenceFree) {
  Manufactured m;
  const Grid g(16, 16);
  EXPECT_LT(divergence(m.velocity(g, 0.0)).max_abs(), 1e-12);
  EXPECT_LT(divergence(m.magnetic(g, 0.0)).max_abs(), 1e-12);
}

TEST(Manufactured, SteadyStateHeldToSecondOrder) {
  Manufactured m;
  const double e16 = experiments::mms_run(m, 16, 1e-3, 0.02).error;
  const double e32 = experiments::mms_run(m, 32, 1e-3, 0.02).error;
  EXPECT_GT(e16 / e32, 3.5);
}

TEST(Manufactured, ZeroSolutionStaysZeroExactly) {
  const SolverConfig cfg = solver_config(8, 1e-2, 0.1);
  const Grid g = cfg.grid();
  const auto run = simulate(cfg, BoundaryTrace::zero(g), VectorField(g), VectorField(g));
  EXPECT_EQ(run.last->u, VectorField(g));
  EXPECT_EQ(run.last->b, VectorField(g));
}

TEST(Report, AssertionRelationsAndMargins) {
  Assertion a{"x", "claim", 1.0, Bound::at_most, 1.0};
  EXPECT_TRUE(a.pass());
  a.bound = Bound::below;
  EXPECT_FALSE(a.pass());
  a.bound = Bound::at_least;
  a.tolerance = 0.5;
  EXPECT_TRUE(a.pass());
  EXPECT_DOUBLE_EQ(a.margin(), 0.5);
  a.measured = std::nan("");
  EXPECT_FALSE(a.pass());
}

TEST(Report, SummaryCsvLayout) {
  ExperimentReport r;
  r.id = "demo";
  r.digest = fnv1a_hex("demo");
  r.check("a", "first claim", 2.0, Bound::at_most, 3.0);
  r.check("b", "second claim", 5.0, Bound::below, 3.0);
  const std::string csv = summary_csv({r});
  EXPECT_EQ(csv.substr(0, kSummaryHeader.size()), kSummaryHeader);
  EXPECT_NE(csv.find("demo," + r.digest + ",a,\"first claim\",2,<=,3,1,true"), std::string::npos);
  EXPECT_NE(csv.find(",b,\"second claim\",5,<,3,-2,false"), std::string::npos);
  EXPECT_FALSE(r.pass());
  ASSERT_EQ(r.failures().size(), 1u);
  EXPECT_EQ(r.failures()[0]->id, "b");
}

TEST(Report, DigestIsFnv1a) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Params, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(Params("e", {{"nx", "32"}}, {{"ny", "4"}}), InputError);
  Params p("e", {{"nx", "32"}, {"dts", "1e-3, 2e-3"}}, {{"nx", "3x"}});
  EXPECT_THROW(p.integer("nx"), InputError);
  EXPECT_EQ(p.reals("dts"), (std::vector<double>{1e-3, 2e-3}));
  EXPECT_THROW(run_experiment("identities", context({{"bogus", "1"}})), InputError);
  EXPECT_THROW(run_experiment("no_such_experiment", context()), InputError);
}

TEST(Scenarios, InitialDataCompatibleForEveryScenario) {
  const SolverConfig cfg = solver_config(12, 1e-2, 0.1);
  for (const auto& sc : scenarios()) {
    const auto trace = trace_for(sc.boundary, cfg);
    const auto [u0, b0] = initial_fields(sc.initial, trace, testing_support::kSeed);
    EXPECT_TRUE(compatibility_check(u0, b0, trace).pass()) << sc.id;
  }
  EXPECT_THROW(find_scenario("nope"), InputError);
  EXPECT_THROW(parse_initial_preset("warm"), InputError);
}

TEST(Experiments, IdentitiesSmoke) {
  const auto r = run_experiment("identities", context({{"nx_list", "16,32"}}));
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.assertions.size(), 3u);
  EXPECT_EQ(r.table.rows.size(), 2u);
}

TEST(Experiments, HeatDecayShortRun) {
  const auto r = run_experiment("heat_decay", context({{"nx", "16"}, {"T", "0.01"}}));
  EXPECT_TRUE(r.pass()) << summary_rows(r);
}

TEST(Experiments, PicardUncoupledRatioIsZero) {
  const auto r = run_experiment(
      "picard", context({{"nx", "12"}, {"warm_T", "0.02"}, {"samples", "2"}, {"dt_list", "2e-3,1e-3"}}));
  bool found = false;
  for (const auto& a : r.assertions)
    if (a.id == "uncoupled_ratio") {
      found = true;
      EXPECT_EQ(a.measured, 0.0);
    }
  EXPECT_TRUE(found);
}

TEST(Experiments, ReportsAreDeterministic) {
  const auto ctx = context({{"nx_list", "8,16"}});
  const auto a = run_experiment("identities", ctx), b = run_experiment("identities", ctx);
  EXPECT_EQ(summary_rows(a), summary_rows(b));
  EXPECT_EQ(a.table, b.table);
  auto other = ctx;
  other.seed += 1;
  EXPECT_NE(run_experiment("identities", other).digest, a.digest);
}

TEST(Tail, SingleModeStateHasExactTails) {
  const Grid g(10, 10);
  const auto stokes = build_stokes_basis(g, 6);
  const int k = 4;  // one-based mode index
  const VectorField xi = stokes.mode(k - 1);
  for (int n = 0; n <= 6; ++n) {
    const double tail = grad_norm_sq(xi - project(stokes, xi, n).field);
    if (n >= k)
      EXPECT_LT(tail, 1e-20);
    else
      EXPECT_NEAR(tail, grad_norm_sq(xi), 1e-9 * grad_norm_sq(xi));
  }
}

TEST(Absorbing, EntryTimeDependsOnlyOnDiameter) {
  AbsorbingConstants k{9.0, 1.0, 1.0, 2.0, 3.0};
  BoundaryWindows w1{0.01, 0.1, 0.2, 0.3, 0.05}, w2 = w1;
  w2.h12_sq = 5.0;
  EXPECT_EQ(absorbing_time(k, w1, 7.0), absorbing_time(k, w2, 7.0));
  const auto r = absorbing_radii(k, w1, 7.0);
  EXPECT_DOUBLE_EQ(r.rho1 / r.rho0, k.c_p + 1.0 + k.c_omega);
  EXPECT_DOUBLE_EQ(r.t2, r.t0 + 1.0);
}

TEST(Absorbing, GateViolationStopsTheExperiment) {
  ExperimentContext ctx = context({{"nx", "12"}, {"amplitude", "50"}});
  ctx.calibration.set("weak_energy", 1.0, "test");
  ctx.calibration.set("c_tilde", 2.0, "test");
  ctx.calibration.set("c_omega", 1.0, "test");
  const auto r = run_experiment("absorbing", ctx);
  ASSERT_EQ(r.assertions.size(), 1u);
  EXPECT_EQ(r.assertions[0].id, "smallness_gate");
  EXPECT_FALSE(r.pass());
}

TEST(Calibration, MissingConstantNamesTheCheckerAndRunCalibrate) {
  try {
    run_experiment("gronwall", context());
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("weak_energy"), std::string::npos);
  }
}
