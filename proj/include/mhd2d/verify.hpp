#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mhd2d/estimates.hpp"
#include "mhd2d/manufactured.hpp"
#include "mhd2d/scenarios.hpp"

namespace mhd2d {

// ---- reports ----------------------------------------------------------------

enum class Bound { at_most, below, at_least, above };

inline const char* to_string(Bound b) {
  switch (b) {
    case Bound::at_most: return "<=";
    case Bound::below: return "<";
    case Bound::at_least: return ">=";
    default: return ">";
  }
}

struct Assertion {
  std::string id;
  std::string reference;  // the claim being checked, in words
  double measured = 0.0;
  Bound bound = Bound::at_most;
  double tolerance = 0.0;

  // Signed distance to the threshold; negative means violated.
  double margin() const {
    return (bound == Bound::at_most || bound == Bound::below) ? tolerance - measured : measured - tolerance;
  }
  bool pass() const {
    if (std::isnan(measured)) return false;
    switch (bound) {
      case Bound::at_most: return measured <= tolerance;
      case Bound::below: return measured < tolerance;
      case Bound::at_least: return measured >= tolerance;
      default: return measured > tolerance;
    }
  }
  bool operator==(const Assertion&) const = default;
};

inline std::string num(double v) { return format_double(v); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    require(row.size() == columns.size(), "table row width does not match the header");
    rows.push_back(std::move(row));
  }
  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
      out += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return out;
  }
  bool operator==(const Table&) const = default;
};

struct ExperimentReport {
  std::string id;
  std::string digest;  // FNV-1a of the resolved inputs
  std::vector<Assertion> assertions;
  Table table;
  double runtime_seconds = 0.0;  // wall clock; kept out of every file

  void check(std::string aid, std::string reference, double measured, Bound bound, double tolerance) {
    assertions.push_back({std::move(aid), std::move(reference), measured, bound, tolerance});
  }
  bool pass() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass(); });
  }
  std::vector<const Assertion*> failures() const {
    std::vector<const Assertion*> f;
    for (const auto& a : assertions)
      if (!a.pass()) f.push_back(&a);
    return f;
  }
};

inline constexpr std::string_view kSummaryHeader =
    "experiment,inputs_digest,assertion,reference,measured,relation,tolerance,margin,pass";

inline std::string summary_rows(const ExperimentReport& r) {
  std::string out;
  for (const auto& a : r.assertions)
    out += r.id + ',' + r.digest + ',' + a.id + ",\"" + a.reference + "\"," + num(a.measured) + ',' +
           to_string(a.bound) + ',' + num(a.tolerance) + ',' + num(a.margin()) + ',' + (a.pass() ? "true" : "false") +
           '\n';
  return out;
}

inline std::string summary_csv(const std::vector<ExperimentReport>& reports) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& r : reports) out += summary_rows(r);
  return out;
}

inline std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- parameters -------------------------------------------------------------

using ParamMap = std::map<std::string, std::string>;

// Experiment parameters over a set of documented defaults. Unknown keys are
// rejected up front.
class Params {
 public:
  Params(const std::string& experiment, const ParamMap& defaults, const ParamMap& given)
      : experiment_(experiment), values_(defaults) {
    std::string bad;
    for (const auto& [k, v] : given) {
      if (!defaults.count(k))
        bad += (bad.empty() ? "" : ", ") + k;
      else
        values_[k] = v;
    }
    if (!bad.empty()) throw InputError("experiment '" + experiment + "': unknown parameter(s) " + bad);
  }

  const ParamMap& values() const { return values_; }
  const std::string& text(const std::string& k) const { return values_.at(k); }

  double real(const std::string& k) const { return parse_real(k, text(k)); }
  int integer(const std::string& k) const { return parse_int(k, text(k)); }

  std::vector<double> reals(const std::string& k) const {
    std::vector<double> out;
    for (const auto& s : split(text(k))) out.push_back(parse_real(k, s));
    return out;
  }
  std::vector<int> integers(const std::string& k) const {
    std::vector<int> out;
    for (const auto& s : split(text(k))) out.push_back(parse_int(k, s));
    return out;
  }
  std::vector<std::string> words(const std::string& k) const { return split(text(k)); }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
      if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
  }
  [[noreturn]] void fail(const std::string& k, const std::string& v, const char* want) const {
    throw InputError("experiment '" + experiment_ + "': parameter " + k + "='" + v + "' is not " + want);
  }
  double parse_real(const std::string& k, const std::string& v) const {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    fail(k, v, "a finite number");
  }
  int parse_int(const std::string& k, const std::string& v) const {
    try {
      std::size_t used = 0;
      const int x = std::stoi(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail(k, v, "an integer");
  }

  std::string experiment_;
  ParamMap values_;
};

struct ExperimentContext {
  CalibrationStore calibration;
  std::uint64_t seed = 0;
  ParamMap params;
  std::function<void(const std::string&)> progress;  // optional verbose sink

  void note(const std::string& s) const {
    if (progress) progress(s);
  }
};

// ---- simulation helpers -----------------------------------------------------

inline SolverConfig solver_config(int n, double dt, double horizon) {
  SolverConfig c;
  c.nx = c.ny = n;
  c.dt = dt;
  c.horizon = horizon;
  return c;
}

inline BoundaryTrace trace_for(const BoundaryModel& model, const SolverConfig& cfg) {
  const Grid g = cfg.grid();
  if (model.empty()) return BoundaryTrace::zero(g);
  return model.sample(BoundaryLayout(g), uniform_times(cfg.dt, cfg.steps()));
}

struct Trajectory {
  EnergyLedger ledger;
  std::vector<SimState> states;  // only when requested
  std::vector<StepReport> reports;
  std::optional<SimState> last;
};

struct RunOptions {
  bool strong = false;
  bool keep_states = false;
  Forcing forcing;
  std::shared_ptr<const SpectralBasis> basis;
};

inline Trajectory simulate(const SolverConfig& cfg, const BoundaryTrace& trace, VectorField u0, VectorField b0,
                           const RunOptions& opt = {}) {
  Integrator in(cfg, trace, opt.basis, opt.forcing);
  SimState s = in.initial_state(std::move(u0), std::move(b0));
  Recorder rec(trace, cfg.dt, opt.strong, s.b);
  Trajectory out;
  s = in.advance(
      std::move(s),
      [&](const SimState& st, const StepReport*) {
        rec.record(st);
        if (opt.keep_states) out.states.push_back(st);
      },
      &out.reports);
  out.ledger = rec.take();
  out.last = std::move(s);
  return out;
}

inline Trajectory simulate_scenario(const Scenario& sc, const SolverConfig& cfg, std::uint64_t seed,
                                    const RunOptions& opt = {}) {
  const auto trace = trace_for(sc.boundary, cfg);
  auto [u0, b0] = initial_fields(sc.initial, trace, seed);
  return simulate(cfg, trace, std::move(u0), std::move(b0), opt);
}

// ---- calibration ------------------------------------------------------------

inline constexpr std::string_view kReferenceScenario = "ramp_reference";

struct CalibrationSettings {
  int nx = 32;
  double dt = 2e-3;
  double horizon = 0.5;
  std::uint64_t seed = 0;
};

// Measures every checker constant on the reference scenario and stores it
// multiplied by the safety factor.
inline CalibrationStore calibrate(const CalibrationSettings& s) {
  const Scenario& sc = find_scenario(kReferenceScenario);
  const SolverConfig cfg = solver_config(s.nx, s.dt, s.horizon);
  const Grid g = cfg.grid();
  const auto trace = trace_for(sc.boundary, cfg);
  auto [u0, b0] = initial_fields(sc.initial, trace, s.seed);
  RunOptions opt;
  opt.strong = true;
  const Trajectory run = simulate(cfg, trace, u0, b0, opt);
  const EnergyLedger& led = run.ledger;

  CalibrationStore store;
  const std::string id(kReferenceScenario);
  store.set("weak_energy", kCalibrationSafety * weak_energy_residual(led).required_constant(), id);
  store.set("strong_energy", kCalibrationSafety * strong_energy_residual(led).required_constant(), id);

  // E(t) <= c_tilde sup|h_E|^2 + e^{-c_p t} E(0); the lift alone already
  // needs c_tilde >= 1, which is the floor.
  const double c_p = poincare_constants(build_stokes_basis(g, 1), build_laplacian_basis(g, 1)).c_p;
  double lift_sup = 0.0;
  for (const auto& r : led.rows()) lift_sup = std::max(lift_sup, r.hE_L2_sq);
  const double e0 = led.front().u_L2_sq + led.front().b_L2_sq;
  double c_tilde = 1.0, c_omega = 0.0;
  for (const auto& r : led.rows()) {
    if (lift_sup > 0.0) c_tilde = std::max(c_tilde, (r.u_L2_sq + r.b_L2_sq - std::exp(-c_p * r.t) * e0) / lift_sup);
    const double h12 = r.h_H12_Gamma * r.h_H12_Gamma;
    if (h12 > 0.0) c_omega = std::max(c_omega, r.hE_H1_sq / h12);
  }
  store.set("c_tilde", kCalibrationSafety * c_tilde, id);
  store.set("c_omega", kCalibrationSafety * c_omega, id);

  const auto par = parabolic_estimate_check(parabolic_lift(b0, trace, cfg.dt, cfg.horizon), trace);
  store.set("parabolic_weak", kCalibrationSafety * par.weak.required_constant(), id);
  store.set("parabolic_strong", kCalibrationSafety * par.strong.required_constant(), id);
  return store;
}

// ---- experiments --------------------------------------------------------------

namespace experiments {

inline double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
inline double spread(const std::vector<double>& v) { return max_of(v) / min_of(v); }

inline void identities(const ExperimentContext&, const Params& p, ExperimentReport& r) {
  using std::numbers::pi;
  const auto sizes = p.integers("nx_list");
  require(sizes.size() >= 2, "identities needs at least two resolutions");
  r.table.columns = {"nx", "lorentz", "curl_curl", "induction"};
  std::vector<IdentityResiduals> res;
  for (int n : sizes) {
    Grid g(n, n);
    const auto b = VectorField::sample(g, [](double x, double y) { return Vec2{std::sin(pi * y), std::sin(pi * x)}; });
    const auto u = VectorField::sample(
        g, [](double x, double y) { return Vec2{std::cos(pi * x) * std::sin(2 * y), std::exp(x) * std::cos(y)}; });
    res.push_back(identity_residuals(b, u));
    r.table.add({std::to_string(n), num(res.back().lorentz), num(res.back().curl_curl), num(res.back().induction)});
  }
  auto worst = [&](double IdentityResiduals::*f) {
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < res.size(); ++k) w = std::min(w, res[k].*f / (res[k + 1].*f));
    return w;
  };
  r.check("lorentz_refinement_ratio", "Lorentz-force identity residual decays under mesh halving",
          worst(&IdentityResiduals::lorentz), Bound::at_least, 3.5);
  r.check("curl_curl_refinement_ratio", "curl-curl identity residual decays under mesh halving",
          worst(&IdentityResiduals::curl_curl), Bound::at_least, 3.5);
  r.check("induction_refinement_ratio", "induction identity residual decays under mesh halving",
          worst(&IdentityResiduals::induction), Bound::at_least, 3.5);
}

struct MmsResult {
  double error = 0.0;  // discrete L2 error of (u, b) at the final time
  VectorField u, b;
};

inline MmsResult mms_run(const Manufactured& m, int n, double dt, double horizon) {
  SolverConfig cfg = solver_config(n, dt, horizon);
  cfg.compatibility = CompatibilityPolicy::project;
  cfg.Re = m.Re;
  cfg.Rm = m.Rm;
  cfg.S = m.S;
  const Grid g = cfg.grid();
  const auto trace = m.trace(BoundaryLayout(g), uniform_times(dt, cfg.steps()));
  RunOptions opt;
  opt.forcing = m.forcing();
  Integrator in(cfg, trace, nullptr, opt.forcing);
  SimState s = in.advance(in.initial_state(m.velocity(g, 0.0), m.magnetic(g, 0.0)));
  const double a = m.amplitude(s.t);
  const auto exact_u = VectorField::sample(g, [&](double x, double y) {
    const auto pr = Manufactured::profile(x, y);
    return Vec2{a * pr.u.x, a * pr.u.y};
  });
  const double error = std::sqrt(norm_sq(s.u - exact_u) + norm_sq(s.b - m.magnetic(g, s.t)));
  return {error, std::move(s.u), std::move(s.b)};
}

inline void mms(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  r.table.columns = {"study", "nx", "dt", "error", "order"};
  const auto sizes = p.integers("nx_list");
  const double dt_s = p.real("spatial_dt"), horizon_s = p.real("spatial_T");
  require(sizes.size() >= 2, "mms needs at least two resolutions");
  Manufactured steady;
  std::vector<double> err;
  for (int n : sizes) {
    ctx.note("mms spatial nx=" + std::to_string(n));
    err.push_back(mms_run(steady, n, dt_s, horizon_s).error);
  }
  double spatial = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::string order;
    if (k > 0) {
      const double o = std::log(err[k - 1] / err[k]) / std::log(static_cast<double>(sizes[k]) / sizes[k - 1]);
      spatial = std::min(spatial, o);
      order = num(o);
    }
    r.table.add({"spatial", std::to_string(sizes[k]), num(dt_s), num(err[k]), order});
  }
  r.check("spatial_order", "steady manufactured solution converges at second order in space", spatial,
          Bound::at_least, 1.9);

  // Temporal order from successive differences, which cancel the fixed
  // spatial error of the common grid.
  const int nt = p.integer("temporal_nx");
  const auto dts = p.reals("dt_list");
  const double horizon_t = p.real("temporal_T");
  require(dts.size() >= 3, "mms needs at least three time steps");
  Manufactured moving;
  moving.time_dependent = true;
  std::vector<MmsResult> runs;
  for (double dt : dts) {
    ctx.note("mms temporal dt=" + num(dt));
    runs.push_back(mms_run(moving, nt, dt, horizon_t));
  }
  std::vector<double> diff;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k)
    diff.push_back(std::sqrt(norm_sq(runs[k].u - runs[k + 1].u) + norm_sq(runs[k].b - runs[k + 1].b)));
  double temporal = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string order;
    if (k >= 2) {
      const double o = std::log(diff[k - 2] / diff[k - 1]) / std::log(dts[k - 2] / dts[k - 1]);
      temporal = std::min(temporal, o);
      order = num(o);
    }
    r.table.add({"temporal", std::to_string(nt), num(dts[k]), num(runs[k].error), order});
  }
  r.check("temporal_order", "time-dependent manufactured solution converges at first order in time", temporal,
          Bound::at_least, 0.9);
}

inline void energy_law(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const int n = p.integer("nx");
  const auto dts = p.reals("dt_list");
  const double horizon = p.real("T");
  const Scenario& sc = find_scenario("decay");
  r.table.columns = {"dt", "t", "energy", "margin"};
  std::vector<double> scaled;
  for (double dt : dts) {
    ctx.note("energy_law dt=" + num(dt));
    const auto run = simulate_scenario(sc, solver_config(n, dt, horizon), ctx.seed);
    const auto t = run.ledger.times();
    std::vector<double> e, d;
    for (const auto& row : run.ledger.rows()) {
      e.push_back(row.u_L2_sq + row.b_L2_sq);
      d.push_back(row.grad_u_L2_sq + row.grad_b_L2_sq);
    }
    const auto de = time_derivative(t, e);
    double worst = 0.0, rise = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double m = de[k] + 2.0 * d[k];
      worst = std::max(worst, std::abs(m));
      if (k > 0) rise = std::max(rise, e[k] - e[k - 1]);
      r.table.add({num(dt), num(t[k]), num(e[k]), num(m)});
    }
    scaled.push_back(worst / (dt * e.front()));
    r.check("energy_decreasing_dt=" + num(dt), "energy strictly decreases without boundary data", rise, Bound::below,
            0.0);
  }
  r.check("margin_first_order", "energy-law margin is O(dt): growth of sup|margin|/dt under refinement",
          max_of(scaled) / scaled.front(), Bound::at_most, 2.0);
}

inline void heat_decay(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const int n = p.integer("nx");
  const double dt = p.real("dt"), horizon = p.real("T");
  const SolverConfig cfg = solver_config(n, dt, horizon);
  const Grid g = cfg.grid();
  const auto lap = build_laplacian_basis(g, 1);
  Integrator in(cfg, BoundaryTrace::zero(g));
  const VectorField zero(g);
  VectorField b = lap.mode(0);
  std::vector<double> t{0.0}, y{std::log(norm_sq(b))};
  for (int k = 1; k <= cfg.steps(); ++k) {
    b = in.b_step(zero, b, in.time_of(k)).first;
    t.push_back(in.time_of(k));
    y.push_back(std::log(norm_sq(b)));
  }
  ctx.note("heat_decay steps=" + std::to_string(cfg.steps()));
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    sxy += (t[k] - tm) * (y[k] - ym);
    sxx += (t[k] - tm) * (t[k] - tm);
  }
  const double rate = -sxy / sxx, expected = 2.0 * lap.value(0);
  r.table.columns = {"fitted_rate", "two_mu1"};
  r.table.add({num(rate), num(expected)});
  r.check("decay_rate_relative_error", "L2 energy of the first Laplacian mode decays at twice its eigenvalue",
          std::abs(rate / expected - 1.0), Bound::at_most, 0.01);
}

inline void gronwall(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const double c_weak = ctx.calibration.get("weak_energy");
  const double c_strong = ctx.calibration.get("strong_energy");
  const SolverConfig cfg = solver_config(p.integer("nx"), p.real("dt"), p.real("T"));
  r.table.columns = {"scenario", "weak_worst_relative_margin", "psi_T", "phi_T", "M_T", "strong_worst_relative_margin"};
  for (const auto& id : p.words("scenarios")) {
    ctx.note("gronwall " + id);
    RunOptions opt;
    opt.strong = true;
    const auto run = simulate_scenario(find_scenario(id), cfg, ctx.seed, opt);
    const auto weak = gronwall_weak(run.ledger, c_weak);
    const auto strong = strong_energy(run.ledger, c_strong);
    double w = -std::numeric_limits<double>::infinity(), s = w;
    for (std::size_t k = 0; k < weak.lhs.size(); ++k) w = std::max(w, (weak.lhs[k] - weak.bound[k]) / weak.bound[k]);
    for (std::size_t k = 0; k < strong.lhs.size(); ++k)
      s = std::max(s, (strong.lhs[k] - strong.bound[k]) / strong.bound[k]);
    r.table.add({id, num(w), num(weak.psi.back()), num(weak.phi.back()), num(weak.M_T), num(s)});
    r.check("weak_bound[" + id + "]", "energy plus dissipation stays below (e^phi phi + 1) psi", w, Bound::at_most,
            0.0);
    r.check("strong_bound[" + id + "]", "H1 energy plus H2 dissipation stays below Phi e^Phi omega + omega", s,
            Bound::at_most, 0.0);
  }
}

struct Distance {
  double weak = 0.0, strong = 0.0;
};

// D = sup(|du|^2 + |db|^2) + int(|grad du|^2 + |grad db|^2) and its
// one-derivative-higher analogue.
inline Distance trajectory_distance(const std::vector<SimState>& a, const std::vector<SimState>& b) {
  require(a.size() == b.size(), "trajectories differ in length");
  std::vector<double> t, g1, g2;
  Distance d;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const VectorField du = a[k].u - b[k].u, db = a[k].b - b[k].b;
    t.push_back(a[k].t);
    const double grad = grad_norm_sq(du) + grad_norm_sq(db);
    d.weak = std::max(d.weak, norm_sq(du) + norm_sq(db));
    d.strong = std::max(d.strong, grad);
    g1.push_back(grad);
    g2.push_back(norm_sq(laplacian(du)) + norm_sq(laplacian(db)));
  }
  d.weak += trapezoid(t, g1);
  d.strong += trapezoid(t, g2);
  return d;
}

inline void continuous_dependence(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const SolverConfig cfg = solver_config(p.integer("nx"), p.real("dt"), p.real("T"));
  const Grid g = cfg.grid();
  const Scenario& sc = find_scenario(p.text("base"));
  const auto eps = p.reals("eps_list");
  require(eps.size() >= 2, "continuous_dependence needs at least two perturbation sizes");
  for (std::size_t k = 1; k < eps.size(); ++k) require(eps[k] < eps[k - 1], "eps_list must be decreasing");

  const auto trace = trace_for(sc.boundary, cfg);
  const auto [u0, b0] = initial_fields(sc.initial, trace, ctx.seed);
  RunOptions keep;
  keep.keep_states = true;
  ctx.note("continuous_dependence base run");
  const auto base = simulate(cfg, trace, u0, b0, keep).states;
  const VectorField xi = build_stokes_basis(g, 1).mode(0);

  auto initial_run = [&](double e) {
    return simulate(cfg, trace, u0 + e * xi, b0 + e * xi, keep).states;
  };
  // Extra boundary mode; the ramp envelope keeps the t=0 trace unchanged.
  auto boundary_model = [&](double e) {
    auto modes = sc.boundary.modes();
    modes.push_back({e, 2, 1, {EnvelopeKind::ramp, 20.0}});
    return BoundaryModel(std::move(modes));
  };
  auto boundary_run = [&](double e) {
    return simulate(cfg, trace_for(boundary_model(e), cfg), u0, b0, keep).states;
  };
  const BoundaryLayout layout(g);
  auto boundary_size = [&](double e) {
    const BoundaryModel unit({{e, 2, 1, {EnvelopeKind::ramp, 20.0}}});
    std::vector<double> t, h;
    for (const auto& s : base) {
      t.push_back(s.t);
      h.push_back(hs_norm_sq(unit.evaluate(layout, s.t), {0.5}));
    }
    return trapezoid(t, h);
  };

  r.table.columns = {"perturbation", "eps", "D", "D_over_eps_sq", "D_strong", "D_over_boundary_data"};
  auto study = [&](const std::string& kind, const std::function<std::vector<SimState>(double)>& run) {
    std::vector<double> d, q, qs, qb;
    for (double e : eps) {
      ctx.note("continuous_dependence " + kind + " eps=" + num(e));
      const auto dist = trajectory_distance(run(e), base);
      d.push_back(dist.weak);
      q.push_back(dist.weak / (e * e));
      qs.push_back(dist.strong / (e * e));
      const double data = kind == "boundary" ? boundary_size(e) : 0.0;
      qb.push_back(data > 0.0 ? dist.weak / data : 0.0);
      r.table.add({kind, num(e), num(dist.weak), num(q.back()), num(dist.strong), data > 0.0 ? num(qb.back()) : ""});
    }
    double mono = 0.0;
    for (std::size_t k = 1; k < d.size(); ++k) mono = std::max(mono, d[k] / d[k - 1]);
    r.check(kind + "_monotone", "difference functional shrinks with the perturbation", mono, Bound::below, 1.0);
    r.check(kind + "_quadratic_spread", "D/eps^2 bounded across perturbation sizes", spread(q), Bound::at_most, 4.0);
    r.check(kind + "_strong_quadratic_spread", "strong-norm D/eps^2 bounded across perturbation sizes", spread(qs),
            Bound::at_most, 4.0);
    if (kind == "boundary")
      r.check("boundary_data_ratio_spread", "D over the boundary-data integral bounded across sizes", spread(qb),
              Bound::at_most, 4.0);
    if (kind == "initial") {
      const std::size_t a = d.size() - 2, b = d.size() - 1;
      const double nominal = (eps[a] / eps[b]) * (eps[a] / eps[b]);
      r.check("initial_last_ratio_low", "consecutive D ratio consistent with quadratic scaling", d[a] / d[b],
              Bound::at_least, nominal / 4.0);
      r.check("initial_last_ratio_high", "consecutive D ratio consistent with quadratic scaling", d[a] / d[b],
              Bound::at_most, nominal * 4.0);
    }
  };
  study("initial", initial_run);
  study("boundary", boundary_run);

  const Distance zero_i = trajectory_distance(initial_run(0.0), base);
  const Distance zero_b = trajectory_distance(boundary_run(0.0), base);
  r.check("zero_perturbation", "unperturbed reruns reproduce the base trajectory exactly",
          zero_i.weak + zero_i.strong + zero_b.weak + zero_b.strong, Bound::at_most, 0.0);
}

inline void picard(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const int n = p.integer("nx");
  const auto dts = p.reals("dt_list");
  const double threshold = p.real("threshold_dt");
  const double warm_dt = p.real("warm_dt"), warm_T = p.real("warm_T");
  const int samples = p.integer("samples");
  require(samples >= 1, "picard needs at least one sample state");
  const Scenario& sc = find_scenario(p.text("scenario"));

  // States along the reference trajectory.
  const SolverConfig warm = solver_config(n, warm_dt, warm_T);
  const long stride = std::max(1L, static_cast<long>(warm.steps() / samples));
  std::vector<SimState> states;
  {
    const auto trace = trace_for(sc.boundary, warm);
    auto [u0, b0] = initial_fields(sc.initial, trace, ctx.seed);
    Integrator in(warm, trace);
    in.advance(in.initial_state(std::move(u0), std::move(b0)), [&](const SimState& s, const StepReport* rep) {
      if (rep && in.step_index(s.t) % stride == 0) states.push_back(s);
    });
  }
  auto ratio = [&](double dt, double scale) {
    SolverConfig c = solver_config(n, dt, warm_T + dt);
    Integrator in(c, trace_for(sc.boundary, c));
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, in.b_step(scale * s.u, s.b, s.t + dt).second.contraction);
    return worst;
  };

  r.table.columns = {"dt", "velocity_scale", "contraction"};
  std::vector<double> q;
  for (double dt : dts) {
    ctx.note("picard dt=" + num(dt));
    q.push_back(ratio(dt, 1.0));
    r.table.add({num(dt), "1", num(q.back())});
    if (dt <= threshold)
      r.check("contraction_dt=" + num(dt), "Picard contraction ratio below one", q.back(), Bound::below, 1.0);
  }
  double growth = 0.0;
  for (std::size_t k = 1; k < dts.size(); ++k)
    if (dts[k] < dts[k - 1]) growth = std::max(growth, q[k] / q[k - 1]);
  r.check("non_increasing_under_refinement", "contraction ratio does not grow as dt shrinks", growth, Bound::at_most,
          1.05);

  const double dt_ref = threshold;
  const double base = ratio(dt_ref, 1.0), doubled = ratio(dt_ref, 2.0), uncoupled = ratio(dt_ref, 0.0);
  r.table.add({num(dt_ref), "2", num(doubled)});
  r.table.add({num(dt_ref), "0", num(uncoupled)});
  r.check("stronger_coupling_raises_ratio", "doubling the velocity increases the contraction ratio", doubled / base,
          Bound::above, 1.0);
  r.check("uncoupled_ratio", "without velocity the magnetic step converges in one solve", uncoupled, Bound::at_most,
          0.0);
}

// Boundary-only ledger rows: trace norms and lift energies at each instant.
inline EnergyLedger boundary_ledger(const BoundaryTrace& trace) {
  const auto& l = trace.layout();
  HarmonicExtender ext(l.grid());
  EnergyLedger led(false);
  for (std::size_t k = 0; k < trace.instants(); ++k) {
    LedgerRow row;
    row.t = trace.times()[k];
    const TraceValues& h = trace.values(k);
    row.h_L2_Gamma = std::sqrt(hs_norm_sq(h, {0.0}));
    row.h_H12_Gamma = std::sqrt(hs_norm_sq(h, {0.5}));
    row.h_H32_Gamma = std::sqrt(hs_norm_sq(h, {1.5}));
    row.dth_Hm12_Gamma = std::sqrt(hs_norm_sq(trace.time_derivative(k), {-0.5}));
    const VectorField he = ext.extend(l, h);
    row.hE_L2_sq = norm_sq(he);
    row.hE_H1_sq = h1_norm_sq(he);
    led.append(row);
  }
  return led;
}

inline void absorbing(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const int n = p.integer("nx");
  const double dt = p.real("dt");
  const double amplitude = p.real("amplitude");
  const double factor = p.real("initial_factor");
  const double tail = p.real("extra_time");
  const Grid g(n, n);
  const Scenario& sc = find_scenario("small_periodic");
  const BoundaryModel model = sc.boundary.scaled(amplitude / sc.boundary.modes().front().amplitude);

  AbsorbingConstants k;
  k.c_p = poincare_constants(build_stokes_basis(g, 1), build_laplacian_basis(g, 1)).c_p;
  k.c0 = k.c1 = ctx.calibration.get("weak_energy");
  k.c_tilde = ctx.calibration.get("c_tilde");
  k.c_omega = ctx.calibration.get("c_omega");

  // Unit-window norms over two periods of the data.
  const BoundaryWindows w =
      boundary_windows(boundary_ledger(model.sample(BoundaryLayout(g), uniform_times(dt, static_cast<int>(std::lround(2.0 / dt))))));
  r.check("smallness_gate", "c1 sup|h|^4 in H^1/2 does not exceed c_p", k.c1 * std::pow(w.h12_sup, 4),
          Bound::at_most, k.c_p);
  if (!smallness_gate(k, w)) return;

  const double rho0_probe = absorbing_radii(k, w, 1.0).rho0;
  const double diam = factor * rho0_probe;
  AbsorbingRadii radii = absorbing_radii(k, w, diam);
  require(std::isfinite(radii.t0), "absorbing experiment needs nonzero boundary data");
  const double horizon = std::ceil((radii.t0 + tail) / dt) * dt;
  const SolverConfig cfg = solver_config(n, dt, horizon);
  const auto trace = trace_for(model, cfg);

  // Initial data on the sphere E(0) = diam: lift plus a scaled random part.
  auto [lift_u, lift_b] = initial_fields(InitialPreset::lift, trace, ctx.seed);
  auto [ru, rb] = initial_fields(InitialPreset::smooth, BoundaryTrace::zero(g), ctx.seed);
  const double qa = norm_sq(ru) + norm_sq(rb), qb = 2.0 * dot(lift_b, rb), qc = norm_sq(lift_b) - diam;
  require(qc < 0.0, "lift energy already exceeds the requested initial energy");
  const double alpha = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  VectorField u0 = alpha * ru, b0 = lift_b + alpha * rb;

  ctx.note("absorbing run to T=" + num(horizon));
  RunOptions opt;
  opt.strong = true;
  const auto run = simulate(cfg, trace, u0, b0, opt);
  const auto t = run.ledger.times();
  std::vector<double> e, v, h1, h2;
  for (const auto& row : run.ledger.rows()) {
    e.push_back(row.u_L2_sq + row.b_L2_sq);
    v.push_back(row.grad_u_L2_sq + row.b_L2_sq + row.grad_b_L2_sq);
    h1.push_back(row.grad_u_L2_sq + row.grad_bhat_L2_sq);
    h2.push_back(row.Su_L2_sq + row.lap_bhat_L2_sq);
  }
  measure_strong_radii(radii, t, h1, h2);

  // Entry: first instant after which E stays in the ball; escape: first exit
  // after the first entry.
  std::size_t entry = t.size();
  for (std::size_t j = t.size(); j-- > 0;) {
    if (e[j] > radii.rho0) break;
    entry = j;
  }
  double escape = std::numeric_limits<double>::infinity();
  bool inside = false;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (e[j] <= radii.rho0) inside = true;
    else if (inside) {
      escape = t[j];
      break;
    }
  }
  double after_t0 = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t[j] >= radii.t0) after_t0 = std::max(after_t0, e[j]);
  const double windows = window_sup(t, v, 1.0, radii.t0);

  r.table.columns = {"t", "energy", "H1_energy"};
  for (std::size_t j = 0; j < t.size(); ++j) r.table.add({num(t[j]), num(e[j]), num(h1[j])});

  r.check("initial_energy_relative_error", "initial energy equals the prescribed ball diameter",
          std::abs(e.front() / diam - 1.0), Bound::at_most, 1e-9);
  r.check("entry_time", "trajectory enters the absorbing ball no later than t0",
          entry < t.size() ? t[entry] : std::numeric_limits<double>::infinity(), Bound::at_most, radii.t0);
  r.check("energy_after_t0", "energy stays within rho0 after t0", after_t0, Bound::at_most, radii.rho0);
  r.check("escape_time", "no exit from the ball after entry (first exit time)", escape, Bound::at_least, horizon);
  r.check("window_integrals", "unit-window V and H1 integrals stay within rho1", windows, Bound::at_most, radii.rho1);
  r.check("rho2_measured", "H1 energy after t2 is finite (measured rho2)", radii.rho2, Bound::below,
          std::numeric_limits<double>::infinity());
  r.check("rho3_measured", "unit-window H2 integrals after t2 are finite (measured rho3)", radii.rho3, Bound::below,
          std::numeric_limits<double>::infinity());

  // Without boundary data the energy decays at least at rate c_p.
  ctx.note("absorbing homogeneous run");
  const SolverConfig c0 = solver_config(n, dt, p.real("decay_T"));
  const auto decay = simulate(c0, BoundaryTrace::zero(g), alpha * ru, alpha * rb);
  double worst = 0.0;
  const double e0 = decay.ledger.front().u_L2_sq + decay.ledger.front().b_L2_sq;
  for (const auto& row : decay.ledger.rows())
    worst = std::max(worst, (row.u_L2_sq + row.b_L2_sq) / (e0 * std::exp(-k.c_p * row.t)));
  r.check("homogeneous_decay", "without boundary data E(t) <= E(0) exp(-c_p t)", worst, Bound::at_most, 1.0);
}

inline void tail(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const int n = p.integer("nx");
  const auto counts = p.integers("n_list");
  require(counts.size() >= 2 && std::is_sorted(counts.begin(), counts.end()), "n_list must be increasing");
  Manufactured steady;
  ctx.note("tail steady run");
  const auto state = mms_run(steady, n, p.real("dt"), p.real("T"));
  const Grid g(n, n);
  const int top = counts.back();
  const auto stokes = build_stokes_basis(g, top + 1);
  const VectorField bt = state.b - HarmonicExtender(g).extend(state.b);

  // Pairing: the smallest m with mu_{m+1} >= lambda_{n+1}.
  const int cap = FaceDofs(g).count();
  int m_top = 0;
  {
    auto lap = build_laplacian_basis(g, std::min(cap, 8 * (top + 1)));
    while (m_top < lap.count() && lap.value(m_top) < stokes.value(top)) ++m_top;
  }
  const auto lap = build_laplacian_basis(g, std::min(cap, m_top + 1));

  r.table.columns = {"n", "m", "gamma", "tail", "tail_times_sqrt_gamma"};
  std::vector<double> tails;
  for (int nn : counts) {
    int m = 0;
    while (m < lap.count() && lap.value(m) < stokes.value(nn)) ++m;
    const VectorField u2 = state.u - project(stokes, state.u, nn).field;
    const VectorField b2 = bt - project(lap, bt, m).field;
    const double gamma = std::min(stokes.value(nn), lap.value(std::min(m, lap.count() - 1)));
    tails.push_back(grad_norm_sq(u2) + grad_norm_sq(b2));
    r.table.add({std::to_string(nn), std::to_string(m), num(gamma), num(tails.back()),
                 num(tails.back() * std::sqrt(gamma))});
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < tails.size(); ++k) worst = std::max(worst, tails[k] / tails[k - 1]);
  r.check("tail_strictly_decreasing", "tail H1 energy strictly decreases in the number of modes", worst, Bound::below,
          1.0);
  r.check("tail_reduction", "tail H1 energy drops by at least 10x across the mode range",
          tails.front() / tails.back(), Bound::at_least, 10.0);
}

inline void basis_inequality(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const auto sizes = p.integers("nx_list");
  const int n = p.integer("n");
  const int samples = p.integer("samples");
  require(sizes.size() >= 2, "basis_inequality needs two resolutions");
  r.table.columns = {"nx", "quantity", "value"};
  std::vector<double> c0s;
  std::vector<std::vector<double>> reg;
  for (int nx : sizes) {
    ctx.note("basis_inequality nx=" + std::to_string(nx));
    const Grid g(nx, nx);
    const auto stokes = build_stokes_basis(g, n + 1);
    const auto chk = basis_inequality_check(stokes, n, samples, ctx.seed);
    c0s.push_back(chk.c0);
    r.table.add({std::to_string(nx), "inverse_inequality_constant_c0", num(chk.c0)});
    const LerayProjector leray(g);
    std::vector<double> rr;
    for (int i = 0; i < n; ++i) {
      rr.push_back(stokes_regularity_ratio(stokes.mode(i), leray));
      r.table.add({std::to_string(nx), "regularity_ratio_mode_" + std::to_string(i + 1), num(rr.back())});
    }
    reg.push_back(std::move(rr));
  }
  r.check("c0_stability", "inverse-inequality constant c0 stable across resolutions", spread(c0s),
          Bound::at_most, 2.0);
  double worst = 1.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> col;
    for (const auto& rr : reg) col.push_back(rr[static_cast<std::size_t>(i)]);
    worst = std::max(worst, spread(col));
  }
  r.check("regularity_stability", "per-mode Stokes regularity ratios stable across resolutions", worst,
          Bound::at_most, 2.0);
}

// Random band-limited zero-trace field: sum of sin(k pi x) sin(l pi y),
// 1 <= k, l <= band, Gaussian coefficients per component.
inline std::vector<double> band_limited_coefficients(std::mt19937_64& rng, int band) {
  std::normal_distribution<double> nd;
  std::vector<double> c(static_cast<std::size_t>(2 * band * band));
  for (double& x : c) x = nd(rng);
  return c;
}

inline VectorField band_limited_field(const Grid& g, const std::vector<double>& c, int band) {
  using std::numbers::pi;
  return VectorField::sample(g, [&](double x, double y) {
    Vec2 v;
    for (int k = 1; k <= band; ++k)
      for (int l = 1; l <= band; ++l) {
        const double s = std::sin(k * pi * x) * std::sin(l * pi * y);
        const std::size_t i = static_cast<std::size_t>((k - 1) * band + (l - 1));
        v.x += c[i] * s;
        v.y += c[i + static_cast<std::size_t>(band * band)] * s;
      }
    return v;
  });
}

inline void brezis_gallouet(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const auto sizes = p.integers("nx_list");
  const int fields = p.integer("fields"), band = p.integer("band");
  require(sizes.size() == 2, "brezis_gallouet compares exactly two resolutions");
  std::mt19937_64 rng(ctx.seed);
  std::vector<std::vector<double>> coef;
  for (int f = 0; f < fields; ++f) coef.push_back(band_limited_coefficients(rng, band));
  r.table.columns = {"nx", "max_ratio"};
  std::vector<double> best;
  for (int nx : sizes) {
    const Grid g(nx, nx);
    double m = 0.0;
    for (const auto& c : coef) m = std::max(m, brezis_gallouet_ratio(band_limited_field(g, c, band)));
    best.push_back(m);
    r.table.add({std::to_string(nx), num(m)});
  }
  r.check("max_ratio_stability", "max log-interpolation ratio agrees across resolutions (relative difference)",
          std::abs(best[0] / best[1] - 1.0), Bound::at_most, 0.1);
}

}  // namespace experiments

// ---- registry -------------------------------------------------------------------

struct ExperimentSpec {
  std::string id;
  ParamMap defaults;
  bool needs_calibration = false;
  std::function<void(const ExperimentContext&, const Params&, ExperimentReport&)> body;
};

inline const std::vector<ExperimentSpec>& experiment_registry();

inline const ExperimentSpec& find_experiment(std::string_view id) {
  for (const auto& e : experiment_registry())
    if (e.id == id) return e;
  std::string known;
  for (const auto& e : experiment_registry()) known += (known.empty() ? "" : ", ") + e.id;
  throw InputError("unknown experiment '" + std::string(id) + "' (known: " + known + ")");
}

inline ExperimentReport run_experiment(std::string_view id, const ExperimentContext& ctx) {
  const ExperimentSpec& spec = find_experiment(id);
  const Params params(spec.id, spec.defaults, ctx.params);
  ExperimentReport rep;
  rep.id = spec.id;
  std::string inputs = spec.id + "\nseed=" + std::to_string(ctx.seed) + '\n';
  for (const auto& [k, v] : params.values()) inputs += k + '=' + v + '\n';
  if (spec.needs_calibration) inputs += ctx.calibration.to_text();
  rep.digest = fnv1a_hex(inputs);
  const auto start = std::chrono::steady_clock::now();
  spec.body(ctx, params, rep);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

namespace experiments {

// Repeats a short run and a cheap experiment and compares every output byte.
inline void determinism(const ExperimentContext& ctx, const Params& p, ExperimentReport& r) {
  const SolverConfig cfg = solver_config(p.integer("nx"), p.real("dt"), p.real("T"));
  const Scenario& sc = find_scenario(p.text("scenario"));
  auto once = [&] {
    const auto run = simulate_scenario(sc, cfg, ctx.seed);
    return encode_checkpoint(*run.last, cfg) + run.ledger.csv();
  };
  auto differing = [](const std::string& a, const std::string& b) {
    double d = std::abs(static_cast<double>(a.size()) - static_cast<double>(b.size()));
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) d += a[k] != b[k];
    return d;
  };
  r.check("run_bit_identical", "repeated run gives identical checkpoint and ledger bytes", differing(once(), once()),
          Bound::at_most, 0.0);
  ExperimentContext sub = ctx;
  sub.params = {{"nx_list", "8,16"}};
  sub.progress = nullptr;
  auto report_text = [&] {
    const auto rep = run_experiment("identities", sub);
    return summary_rows(rep) + rep.table.csv();
  };
  r.check("experiment_bit_identical", "repeated experiment gives identical report bytes",
          differing(report_text(), report_text()), Bound::at_most, 0.0);
  r.table.columns = {"check", "bytes_compared"};
  r.table.add({"run", std::to_string(once().size())});
}

}  // namespace experiments

inline const std::vector<ExperimentSpec>& experiment_registry() {
  namespace x = experiments;
  static const std::vector<ExperimentSpec> all{
      {"identities", {{"nx_list", "32,64"}}, false, x::identities},
      {"mms",
       {{"nx_list", "16,32,64"},
        {"spatial_dt", "1e-3"},
        {"spatial_T", "0.1"},
        {"temporal_nx", "32"},
        {"dt_list", "4e-3,2e-3,1e-3"},
        {"temporal_T", "0.2"}},
       false,
       x::mms},
      {"energy_law", {{"nx", "32"}, {"dt_list", "2e-3,1e-3,5e-4"}, {"T", "0.1"}}, false, x::energy_law},
      {"heat_decay", {{"nx", "32"}, {"dt", "1e-4"}, {"T", "0.05"}}, false, x::heat_decay},
      {"gronwall",
       {{"nx", "32"}, {"dt", "2e-3"}, {"T", "0.5"}, {"scenarios", "decay,ramp_reference,oscillatory,constant,mixed"}},
       true,
       x::gronwall},
      {"continuous_dependence",
       {{"nx", "32"}, {"dt", "2e-3"}, {"T", "0.2"}, {"base", "ramp_reference"}, {"eps_list", "1e-2,1e-3,1e-4"}},
       false,
       x::continuous_dependence},
      {"picard",
       {{"nx", "32"},
        {"dt_list", "4e-3,2e-3,1e-3"},
        {"threshold_dt", "1e-3"},
        {"warm_dt", "1e-3"},
        {"warm_T", "0.1"},
        {"samples", "5"},
        {"scenario", "ramp_reference"}},
       false,
       x::picard},
      {"absorbing",
       {{"nx", "32"},
        {"dt", "5e-3"},
        {"amplitude", "0.05"},
        {"initial_factor", "100"},
        {"extra_time", "1.5"},
        {"decay_T", "1"}},
       true,
       x::absorbing},
      {"tail", {{"nx", "32"}, {"dt", "0.01"}, {"T", "0.5"}, {"n_list", "4,8,16,32"}}, false, x::tail},
      {"basis_inequality", {{"nx_list", "32,64"}, {"n", "10"}, {"samples", "200"}}, false, x::basis_inequality},
      {"brezis_gallouet", {{"nx_list", "32,64"}, {"fields", "200"}, {"band", "4"}}, false, x::brezis_gallouet},
      {"determinism", {{"nx", "16"}, {"dt", "2e-3"}, {"T", "0.1"}, {"scenario", "ramp_reference"}}, false,
       x::determinism},
  };
  return all;
}

}  // namespace mhd2d
