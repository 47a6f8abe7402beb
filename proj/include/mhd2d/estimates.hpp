#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mhd2d/dynamics.hpp"

namespace mhd2d {

// Exponents of the two-dimensional interpolation inequalities.
inline constexpr double kTheta = 0.5;
inline constexpr double kQ = 2.0;
inline constexpr double kQn = 4.0;

// ---- ledger -----------------------------------------------------------------

struct LedgerRow {
  double t = 0.0;
  double u_L2_sq = 0, grad_u_L2_sq = 0, Su_L2_sq = 0;
  double b_L2_sq = 0, grad_b_L2_sq = 0, btilde_L2_sq = 0, grad_btilde_L2_sq = 0;
  double bhat_H1_sq = 0, grad_bhat_L2_sq = 0, lap_bhat_L2_sq = 0;
  double u_L4 = 0, b_L4 = 0, u_Linf = 0, b_Linf = 0;
  double h_L2_Gamma = 0, h_H12_Gamma = 0, h_H32_Gamma = 0, dth_Hm12_Gamma = 0;
  double hE_L2_sq = 0, hE_H1_sq = 0;
  double div_u_Linf = 0, div_b_Linf = 0;

  bool operator==(const LedgerRow&) const = default;
};

struct LedgerColumn {
  const char* name;
  double LedgerRow::*field;
  bool strong_only;
};

inline constexpr std::array<LedgerColumn, 23> kLedgerColumns{{
    {"t", &LedgerRow::t, false},
    {"u_L2_sq", &LedgerRow::u_L2_sq, false},
    {"grad_u_L2_sq", &LedgerRow::grad_u_L2_sq, false},
    {"Su_L2_sq", &LedgerRow::Su_L2_sq, false},
    {"b_L2_sq", &LedgerRow::b_L2_sq, false},
    {"grad_b_L2_sq", &LedgerRow::grad_b_L2_sq, false},
    {"btilde_L2_sq", &LedgerRow::btilde_L2_sq, false},
    {"grad_btilde_L2_sq", &LedgerRow::grad_btilde_L2_sq, false},
    {"bhat_H1_sq", &LedgerRow::bhat_H1_sq, true},
    {"grad_bhat_L2_sq", &LedgerRow::grad_bhat_L2_sq, true},
    {"lap_bhat_L2_sq", &LedgerRow::lap_bhat_L2_sq, true},
    {"u_L4", &LedgerRow::u_L4, false},
    {"b_L4", &LedgerRow::b_L4, false},
    {"u_Linf", &LedgerRow::u_Linf, false},
    {"b_Linf", &LedgerRow::b_Linf, false},
    {"h_L2_Gamma", &LedgerRow::h_L2_Gamma, false},
    {"h_H12_Gamma", &LedgerRow::h_H12_Gamma, false},
    {"h_H32_Gamma", &LedgerRow::h_H32_Gamma, false},
    {"dth_Hm12_Gamma", &LedgerRow::dth_Hm12_Gamma, false},
    {"hE_L2_sq", &LedgerRow::hE_L2_sq, false},
    {"hE_H1_sq", &LedgerRow::hE_H1_sq, false},
    {"div_u_Linf", &LedgerRow::div_u_Linf, false},
    {"div_b_Linf", &LedgerRow::div_b_Linf, false},
}};

class EnergyLedger {
 public:
  explicit EnergyLedger(bool strong = false) : strong_(strong) {}

  bool strong() const { return strong_; }
  const std::vector<LedgerRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  const LedgerRow& front() const { return rows_.front(); }
  const LedgerRow& back() const { return rows_.back(); }

  void append(const LedgerRow& r) {
    if (!rows_.empty() && !(r.t > rows_.back().t)) throw ContractViolation("ledger instants must increase");
    rows_.push_back(r);
  }

  std::vector<double> column(double LedgerRow::*f) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.*f);
    return out;
  }
  std::vector<double> times() const { return column(&LedgerRow::t); }

  std::string csv() const {
    std::string out;
    bool first = true;
    for (const auto& c : kLedgerColumns) {
      if (c.strong_only && !strong_) continue;
      out += (first ? "" : ",") + std::string(c.name);
      first = false;
    }
    out += '\n';
    for (const auto& r : rows_) {
      first = true;
      for (const auto& c : kLedgerColumns) {
        if (c.strong_only && !strong_) continue;
        out += (first ? "" : ",") + format_double(r.*c.field);
        first = false;
      }
      out += '\n';
    }
    return out;
  }

 private:
  bool strong_;
  std::vector<LedgerRow> rows_;
};

inline double stokes_norm_sq(const VectorField& u, const LerayProjector& leray) {
  VectorField su = laplacian(u);
  su *= -1.0;
  su.clear_boundary();
  leray.project(su);
  return norm_sq(su);
}

// Records ledger rows along a run. Rows must arrive at consecutive steps:
// the parabolic lift h_p (strong runs only) is advanced alongside.
class Recorder {
 public:
  Recorder(const BoundaryTrace& trace, double dt, bool strong, const VectorField& b0)
      : trace_(trace),
        dt_(dt),
        extender_(trace.layout().grid()),
        leray_(trace.layout().grid()),
        ledger_(strong),
        hp_(b0) {
    if (strong) heat_.emplace(trace.layout().grid(), dt);
  }

  const EnergyLedger& ledger() const { return ledger_; }
  EnergyLedger take() { return std::move(ledger_); }

  const LedgerRow& record(const SimState& s) {
    const auto& l = trace_.layout();
    const long k = std::lround(s.t / dt_);
    if (ledger_.strong() && ledger_.size() > 0) {
      if (k != last_step_ + 1) throw ContractViolation("strong ledger needs consecutive steps");
      VectorField bnd(l.grid());
      apply_trace(bnd, l, trace_.at(s.t));
      hp_ = heat_->step(hp_, bnd);
    }
    last_step_ = k;

    LedgerRow r;
    r.t = s.t;
    r.u_L2_sq = norm_sq(s.u);
    r.grad_u_L2_sq = grad_norm_sq(s.u);
    r.Su_L2_sq = stokes_norm_sq(s.u, leray_);
    r.b_L2_sq = norm_sq(s.b);
    r.grad_b_L2_sq = grad_norm_sq(s.b);
    const VectorField he = extender_.extend(s.b);
    const VectorField bt = s.b - he;
    r.btilde_L2_sq = norm_sq(bt);
    r.grad_btilde_L2_sq = grad_norm_sq(bt);
    if (ledger_.strong()) {
      const VectorField bh = s.b - hp_;
      r.bhat_H1_sq = h1_norm_sq(bh);
      r.grad_bhat_L2_sq = grad_norm_sq(bh);
      r.lap_bhat_L2_sq = norm_sq(laplacian(bh));
    }
    r.u_L4 = lp_norm(s.u, 4.0);
    r.b_L4 = lp_norm(s.b, 4.0);
    r.u_Linf = max_norm(s.u);
    r.b_Linf = max_norm(s.b);
    const TraceValues h = trace_.at(s.t);
    r.h_L2_Gamma = std::sqrt(hs_norm_sq(h, {0.0}));
    r.h_H12_Gamma = std::sqrt(hs_norm_sq(h, {0.5}));
    r.h_H32_Gamma = std::sqrt(hs_norm_sq(h, {1.5}));
    r.dth_Hm12_Gamma = std::sqrt(hs_norm_sq(trace_.time_derivative_at(s.t), {-0.5}));
    r.hE_L2_sq = norm_sq(he);
    r.hE_H1_sq = h1_norm_sq(he);
    r.div_u_Linf = divergence(s.u).max_abs();
    r.div_b_Linf = divergence(s.b).max_abs();
    ledger_.append(r);
    return ledger_.back();
  }

  // Observer suitable for Integrator::advance.
  Integrator::Observer observer() {
    return [this](const SimState& s, const StepReport*) { record(s); };
  }

 private:
  BoundaryTrace trace_;
  double dt_;
  HarmonicExtender extender_;
  LerayProjector leray_;
  EnergyLedger ledger_;
  VectorField hp_;
  std::optional<HeatStepper> heat_;
  long last_step_ = -1;
};

// ---- time-series helpers ----------------------------------------------------

// Centred differences inside, one-sided at the ends.
inline std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& f) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d.front() = (f[1] - f[0]) / (t[1] - t[0]);
  d.back() = (f[n - 1] - f[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (t[k + 1] - t[k - 1]);
  return d;
}

// Integral of the piecewise-linear interpolant of f over [a, b] within the
// sampled range.
inline double integrate_window(const std::vector<double>& t, const std::vector<double>& f, double a, double b) {
  auto value = [&](double x) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return f.front();
    if (it == t.end()) return f.back();
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[k - 1]) / (t[k] - t[k - 1]);
    return (1 - w) * f[k - 1] + w * f[k];
  };
  a = std::max(a, t.front());
  b = std::min(b, t.back());
  if (!(b > a)) return 0.0;
  double s = 0.0, prev_x = a, prev_f = value(a);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= a) continue;
    if (t[k] >= b) break;
    s += 0.5 * (t[k] - prev_x) * (f[k] + prev_f);
    prev_x = t[k];
    prev_f = f[k];
  }
  return s + 0.5 * (b - prev_x) * (value(b) + prev_f);
}

// sup over start instants t of int_t^{t+width} f. Windows that would leave
// the sampled range are dropped; a range shorter than the width gives the
// whole integral.
inline double window_sup(const std::vector<double>& t, const std::vector<double>& f, double width,
                         double from = -std::numeric_limits<double>::infinity()) {
  if (t.size() < 2) return 0.0;
  const double end = t.back();
  double best = 0.0;
  bool any = false;
  for (double s : t) {
    if (s < from || s + width > end + 1e-12) continue;
    best = std::max(best, integrate_window(t, f, s, s + width));
    any = true;
  }
  if (!any) best = integrate_window(t, f, std::max(from, t.front()), end);
  return best;
}

// Largest dyadic eta (2^-k, k = 0..30, not exceeding the horizon) whose
// window integrals of |g|^p stay below eps; 0 if none does.
inline double normality_check(const std::vector<double>& t, const std::vector<double>& g_norm, double eps, double p) {
  std::vector<double> gp(g_norm.size());
  for (std::size_t k = 0; k < gp.size(); ++k) gp[k] = std::pow(std::abs(g_norm[k]), p);
  const double horizon = t.back() - t.front();
  for (int k = 0; k <= 30; ++k) {
    const double eta = std::ldexp(1.0, -k);
    if (eta > horizon + 1e-12) continue;
    if (window_sup(t, gp, eta) <= eps) return eta;
  }
  return 0.0;
}

// ---- energy inequalities ----------------------------------------------------

// d/dt(|u|^2+|bt|^2) + |grad u|^2 + |grad bt|^2
//     <= c |h|^4_{1/2} (|u|^2+|bt|^2) + c (|h|^2_{1/2} + |d_t h|^2_{-1/2} + |h|^4_{1/2})
inline LinearInequality weak_energy_residual(const EnergyLedger& ledger) {
  const auto t = ledger.times();
  std::vector<double> e;
  for (const auto& r : ledger.rows()) e.push_back(r.u_L2_sq + r.btilde_L2_sq);
  const auto de = time_derivative(t, e);
  LinearInequality q;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& r = ledger.rows()[k];
    const double h2 = r.h_H12_Gamma * r.h_H12_Gamma;
    q.push(t[k], de[k] + r.grad_u_L2_sq + r.grad_btilde_L2_sq, 0.0,
           h2 * h2 * e[k] + h2 + r.dth_Hm12_Gamma * r.dth_Hm12_Gamma + h2 * h2);
  }
  return q;
}

// d/dt(|grad u|^2+|grad bh|^2) + |Su|^2 + |lap bh|^2
//     <= K (|grad u|^2+|grad bh|^2) + c E |h|^4_{1/2} + c |h|^2_{3/2},  K = c E (|grad u|^2+|grad bh|^2)
inline LinearInequality strong_energy_residual(const EnergyLedger& ledger) {
  require(ledger.strong(), "strong energy residual needs a strong ledger");
  const auto t = ledger.times();
  std::vector<double> g;
  for (const auto& r : ledger.rows()) g.push_back(r.grad_u_L2_sq + r.grad_bhat_L2_sq);
  const auto dg = time_derivative(t, g);
  LinearInequality q;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& r = ledger.rows()[k];
    const double e = r.u_L2_sq + r.b_L2_sq;
    const double h2 = r.h_H12_Gamma * r.h_H12_Gamma;
    q.push(t[k], dg[k] + r.Su_L2_sq + r.lap_bhat_L2_sq, 0.0,
           e * g[k] * g[k] + e * h2 * h2 + r.h_H32_Gamma * r.h_H32_Gamma);
  }
  return q;
}

struct GronwallWeak {
  double c = 0.0;
  std::vector<double> times, psi, phi, lhs, bound;
  double M_T = 0.0;

  std::vector<double> margins() const {
    std::vector<double> m(lhs.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = lhs[k] - bound[k];
    return m;
  }
  bool holds(double tol = 0.0) const {
    for (double m : margins())
      if (m > tol) return false;
    return true;
  }
};

// Weak Gronwall bound |u|^2 + |bt|^2 + int(|grad u|^2 + |grad bt|^2) <= (e^phi phi + 1) psi.
inline GronwallWeak gronwall_weak(const EnergyLedger& ledger, double c) {
  GronwallWeak g;
  g.c = c;
  g.times = ledger.times();
  std::vector<double> data, quart, dissip, h12sq, dthsq;
  for (const auto& r : ledger.rows()) {
    const double h2 = r.h_H12_Gamma * r.h_H12_Gamma;
    const double d2 = r.dth_Hm12_Gamma * r.dth_Hm12_Gamma;
    data.push_back(h2 + d2 + h2 * h2);
    quart.push_back(std::pow(r.h_H12_Gamma, kQn));
    dissip.push_back(r.grad_u_L2_sq + r.grad_btilde_L2_sq);
    h12sq.push_back(h2);
    dthsq.push_back(d2);
  }
  const auto int_data = cumulative_trapezoid(g.times, data);
  const auto int_quart = cumulative_trapezoid(g.times, quart);
  const auto int_dissip = cumulative_trapezoid(g.times, dissip);
  const double e0 = ledger.front().u_L2_sq + ledger.front().b_L2_sq;
  for (std::size_t k = 0; k < g.times.size(); ++k) {
    const auto& r = ledger.rows()[k];
    g.psi.push_back(e0 + c * int_data[k]);
    g.phi.push_back(c * int_quart[k]);
    g.lhs.push_back(r.u_L2_sq + r.btilde_L2_sq + int_dissip[k]);
    g.bound.push_back((std::exp(g.phi[k]) * g.phi[k] + 1.0) * g.psi[k]);
  }
  g.M_T = g.bound.back() + c * (trapezoid(g.times, h12sq) + trapezoid(g.times, dthsq));
  return g;
}

struct GronwallStrong {
  double c = 0.0;
  std::vector<double> times, K, Phi, omega, lhs, bound;

  bool holds(double tol = 0.0) const {
    for (std::size_t k = 0; k < lhs.size(); ++k)
      if (lhs[k] - bound[k] > tol) return false;
    return true;
  }
};

// Strong Gronwall bound |grad u|^2 + |grad bh|^2 + int(|Su|^2 + |lap bh|^2) <= Phi e^Phi omega + omega,
// Phi = exp(int K).
inline GronwallStrong strong_energy(const EnergyLedger& ledger, double c) {
  require(ledger.strong(), "strong Gronwall bound needs a strong ledger");
  GronwallStrong g;
  g.c = c;
  g.times = ledger.times();
  std::vector<double> forcing, h32, dissip;
  for (const auto& r : ledger.rows()) {
    const double e = r.u_L2_sq + r.b_L2_sq;
    g.K.push_back(c * e * (r.grad_u_L2_sq + r.grad_bhat_L2_sq));
    forcing.push_back(e * std::pow(r.h_H12_Gamma, 4));
    h32.push_back(r.h_H32_Gamma * r.h_H32_Gamma);
    dissip.push_back(r.Su_L2_sq + r.lap_bhat_L2_sq);
  }
  const auto int_k = cumulative_trapezoid(g.times, g.K);
  const auto int_f = cumulative_trapezoid(g.times, forcing);
  const auto int_h = cumulative_trapezoid(g.times, h32);
  const auto int_d = cumulative_trapezoid(g.times, dissip);
  const double g0 = ledger.front().grad_u_L2_sq + ledger.front().grad_bhat_L2_sq;
  for (std::size_t k = 0; k < g.times.size(); ++k) {
    const auto& r = ledger.rows()[k];
    g.Phi.push_back(std::exp(int_k[k]));
    g.omega.push_back(g0 + c * int_f[k] + c * int_h[k]);
    g.lhs.push_back(r.grad_u_L2_sq + r.grad_bhat_L2_sq + int_d[k]);
    g.bound.push_back(g.Phi[k] * std::exp(g.Phi[k]) * g.omega[k] + g.omega[k]);
  }
  return g;
}

// ---- absorbing sets ---------------------------------------------------------

struct AbsorbingConstants {
  double c_p = 0.0;      // half the smaller Poincare constant
  double c0 = 0.0;       // data constant of the weak energy inequality
  double c1 = 0.0;       // growth constant of the weak energy inequality
  double c_tilde = 0.0;  // lift constant of the energy decay bound
  double c_omega = 0.0;  // |h_E|^2_{H1} <= c_omega |h|^2_{1/2}
};

// Translation-bounded boundary quantities over unit windows.
struct BoundaryWindows {
  double hE_sup = 0.0;       // sup_t |h_E|^2, the L-infinity-L^2 norm squared
  double h12_sq = 0.0;       // sup_t int_t^{t+1} |h|^2_{1/2}
  double dth_sq = 0.0;       // sup_t int_t^{t+1} |d_t h|^2_{-1/2}
  double h12_quartic = 0.0;  // sup_t int_t^{t+1} |h|^4_{1/2}
  double h12_sup = 0.0;      // sup_t |h|_{1/2}
};

inline BoundaryWindows boundary_windows(const EnergyLedger& ledger) {
  BoundaryWindows w;
  const auto t = ledger.times();
  std::vector<double> a, b, c;
  for (const auto& r : ledger.rows()) {
    w.hE_sup = std::max(w.hE_sup, r.hE_L2_sq);
    w.h12_sup = std::max(w.h12_sup, r.h_H12_Gamma);
    a.push_back(r.h_H12_Gamma * r.h_H12_Gamma);
    b.push_back(r.dth_Hm12_Gamma * r.dth_Hm12_Gamma);
    c.push_back(std::pow(r.h_H12_Gamma, 4));
  }
  w.h12_sq = window_sup(t, a, 1.0);
  w.dth_sq = window_sup(t, b, 1.0);
  w.h12_quartic = window_sup(t, c, 1.0);
  return w;
}

struct AbsorbingRadii {
  double rho0 = 0.0, rho1 = 0.0;
  double t0 = 0.0, t2 = 0.0;  // for the configured diam(B); +inf when h vanishes
  double rho2 = 0.0, rho3 = 0.0;  // measured after t2
};

inline double absorbing_time(const AbsorbingConstants& k, const BoundaryWindows& w, double diam) {
  const double floor = k.c_tilde * w.hE_sup;
  if (floor <= 0.0) return diam > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::max(0.0, std::log(diam / floor) / k.c_p);
}

inline AbsorbingRadii absorbing_radii(const AbsorbingConstants& k, const BoundaryWindows& w, double diam) {
  require(k.c_p > 0.0, "absorbing radii need c_p > 0");
  AbsorbingRadii r;
  const double gain = std::exp(k.c_p) / (std::exp(k.c_p) - 1.0);
  r.rho0 = 2.0 * k.c_tilde * w.hE_sup + gain * k.c0 * (w.h12_sq + w.dth_sq + w.h12_quartic);
  r.rho1 = (k.c_p + 1.0 + k.c_omega) * r.rho0;
  r.t0 = absorbing_time(k, w, diam);
  r.t2 = r.t0 + 1.0;
  return r;
}

// Empirical strong radii: sup of the H1 energy and of unit-window H2
// integrals after t2.
inline void measure_strong_radii(AbsorbingRadii& r, const std::vector<double>& t, const std::vector<double>& h1_energy,
                                 const std::vector<double>& h2_energy) {
  r.rho2 = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= r.t2) r.rho2 = std::max(r.rho2, h1_energy[k]);
  r.rho3 = window_sup(t, h2_energy, 1.0, r.t2);
}

// Smallness of the boundary data: c1 sup |h|^4_{1/2} <= c_p.
inline bool smallness_gate(const AbsorbingConstants& k, const BoundaryWindows& w) {
  return k.c1 * std::pow(w.h12_sup, 4) <= k.c_p;
}

// ---- functional inequalities ------------------------------------------------

// |g|_inf / (|g|_{H1} (1 + ln(|g|^2_{H2} / |g|^2_{H1}))^{1/2}).
inline double brezis_gallouet_ratio(const VectorField& g) {
  const double h1 = h1_norm_sq(g);
  if (!(h1 > 0.0)) throw InputError("Brezis-Gallouet ratio of a zero field");
  const double h2 = h2_norm_sq(g);
  return max_norm(g) / (std::sqrt(h1) * std::sqrt(1.0 + std::log(h2 / h1)));
}

// (|u|_{H2} + |grad p|) / |Su| with p the pressure of the Stokes problem Su = -L u + grad p.
inline double stokes_regularity_ratio(const VectorField& u, const LerayProjector& leray) {
  VectorField r = laplacian(u);
  r *= -1.0;
  r.clear_boundary();
  VectorField su = r;
  ScalarField p = leray.project(su);
  const double s = norm(su);
  if (!(s > 0.0)) throw InputError("Stokes regularity ratio of a field with Su = 0");
  VectorField gp = gradient(p);
  gp.clear_boundary();
  return (std::sqrt(h2_norm_sq(u)) + norm(gp)) / s;
}

// ---- calibration store ------------------------------------------------------

inline constexpr double kCalibrationSafety = 2.0;
inline constexpr std::string_view kCalibrationHeader = "mhd2d-calibration 1";

// Named constants measured on reference scenarios, frozen for assertion
// runs. Text format: header line, then "name value scenario" per line.
class CalibrationStore {
 public:
  struct Entry {
    double value;
    std::string scenario;
    bool operator==(const Entry&) const = default;
  };

  void set(const std::string& name, double value, const std::string& scenario) {
    if (!std::isfinite(value) || value < 0.0)
      throw SolverError("calibration of '" + name + "' produced " + format_double(value));
    entries_[name] = {value, scenario};
  }
  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  double get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw InputError("calibration constant '" + name + "' missing; run calibrate first");
    return it->second.value;
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  bool operator==(const CalibrationStore&) const = default;

  std::string to_text() const {
    std::string out(kCalibrationHeader);
    out += '\n';
    for (const auto& [k, e] : entries_) out += k + ' ' + format_double(e.value) + ' ' + e.scenario + '\n';
    return out;
  }

  static CalibrationStore parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCalibrationHeader)
      throw InputError("calibration store: missing or unsupported header");
    CalibrationStore s;
    int n = 1;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string name, value, scenario, extra;
      if (!(ls >> name >> value >> scenario) || (ls >> extra))
        throw InputError("calibration store line " + std::to_string(n) + ": expected 'name value scenario'");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw InputError("calibration store line " + std::to_string(n) + ": bad value '" + value + "'");
      }
      s.entries_[name] = {v, scenario};
    }
    return s;
  }

  static CalibrationStore load(const std::filesystem::path& p) { return parse(read_file(p)); }
  void save(const std::filesystem::path& p) const { atomic_write(p, to_text()); }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace mhd2d
