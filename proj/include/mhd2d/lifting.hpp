#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mhd2d/boundary.hpp"

namespace mhd2d {

namespace detail {
inline SpMat homogeneous_laplacian_matrix(const FaceDofs& dofs) {
  return assemble_laplacian(dofs, VectorField(dofs.grid())).A;
}
}  // namespace detail

// Right-hand side contributed by boundary data: L applied to v with its
// interior faces zeroed, restricted to interior faces.
inline Vec boundary_shift(const FaceDofs& dofs, const VectorField& boundary) {
  VectorField b(dofs.grid());
  b.copy_boundary_from(boundary);
  Vec s;
  dofs.gather(laplacian(b), s);
  return s;
}

// Discrete harmonic extension of boundary data, component by component.
// The factorization of the Dirichlet Laplacian is computed once.
class HarmonicExtender {
 public:
  explicit HarmonicExtender(const Grid& g) : dofs_(g) {
    neg_lap_ = -detail::homogeneous_laplacian_matrix(dofs_);
    solver_.compute(neg_lap_);
    if (solver_.info() != Eigen::Success) throw SolverError("harmonic extension: factorization failed");
  }

  const Grid& grid() const { return dofs_.grid(); }

  VectorField extend(const VectorField& boundary) const {
    VectorField v(grid());
    v.copy_boundary_from(boundary);
    const Vec shift = boundary_shift(dofs_, v);
    Vec x = solver_.solve(shift);
    const double res = (neg_lap_ * x - shift).norm();
    if (!(res <= 1e-10 * std::max(shift.norm(), 1e-300)) && shift.norm() > 0.0)
      throw SolverError("harmonic extension: relative residual " + format_double(res / shift.norm()));
    dofs_.scatter(x, v);
    return v;
  }

  VectorField extend(const BoundaryLayout& l, const TraceValues& h) const {
    VectorField b(grid());
    apply_trace(b, l, h);
    return extend(b);
  }

 private:
  FaceDofs dofs_;
  SpMat neg_lap_;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

inline VectorField harmonic_extend(const BoundaryTrace& trace, double t) {
  return HarmonicExtender(trace.layout().grid()).extend(trace.layout(), trace.at(t));
}

// Implicit-Euler heat step with Dirichlet data: (I - dt L) x = x_prev + dt shift(h).
class HeatStepper {
 public:
  HeatStepper(const Grid& g, double dt) : dofs_(g), dt_(dt) {
    require(dt > 0.0, "heat step needs dt > 0");
    SpMat m = identity_matrix(dofs_.count()) - dt * detail::homogeneous_laplacian_matrix(dofs_);
    solver_.compute(m);
    if (solver_.info() != Eigen::Success) throw SolverError("heat step: factorization failed");
  }

  double dt() const { return dt_; }

  // Advances prev one step; the boundary data of `boundary` is the Dirichlet
  // data at the new time and is copied into the result.
  VectorField step(const VectorField& prev, const VectorField& boundary) const {
    VectorField next(dofs_.grid());
    next.copy_boundary_from(boundary);
    Vec x;
    dofs_.gather(prev, x);
    x += dt_ * boundary_shift(dofs_, next);
    dofs_.scatter(Vec(solver_.solve(x)), next);
    return next;
  }

 private:
  FaceDofs dofs_;
  double dt_;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

enum class CompatibilityPolicy { reject, project };

// Boundary tolerance for the compatibility of initial and boundary data.
inline double compatibility_tolerance(const BoundaryLayout& l, const TraceValues& h0) {
  return 1e-8 * (1.0 + trace_l2(l, h0));
}

struct ParabolicRun {
  std::vector<double> times;
  std::vector<VectorField> states;
};

// Heat flow started at b0 with the trace as Dirichlet data, sampled at
// t = k dt for k = 0..round(horizon/dt).
inline ParabolicRun parabolic_lift(const VectorField& b0, const BoundaryTrace& trace, double dt, double horizon,
                                   CompatibilityPolicy policy = CompatibilityPolicy::reject) {
  const auto& l = trace.layout();
  require_same_grid(b0.grid(), l.grid());
  require(horizon >= dt, "parabolic lift needs horizon >= dt");
  const TraceValues h0 = trace.at(0.0);
  VectorField start = b0;
  const double mismatch = trace_residual(b0, l, h0);
  if (mismatch > compatibility_tolerance(l, h0)) {
    if (policy == CompatibilityPolicy::reject)
      throw InputError("initial data does not match the boundary trace at t=0 (L2 mismatch " +
                       format_double(mismatch) + ")");
    apply_trace(start, l, h0);
  }
  const int steps = static_cast<int>(std::lround(horizon / dt));
  HeatStepper heat(l.grid(), dt);
  ParabolicRun run;
  run.times.push_back(0.0);
  run.states.push_back(start);
  VectorField boundary(l.grid());
  for (int k = 1; k <= steps; ++k) {
    const double t = k * dt;
    apply_trace(boundary, l, trace.at(t));
    run.states.push_back(heat.step(run.states.back(), boundary));
    run.times.push_back(t);
  }
  return run;
}

// Trapezoid rule over possibly non-uniform samples; cumulative values.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return out;
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  return t.empty() ? 0.0 : cumulative_trapezoid(t, f).back();
}

// Ratio num/den with 0/0 := 0; a nonzero numerator over a zero denominator
// is an inconsistency.
inline double safe_ratio(double num, double den, const char* what) {
  if (den > 0.0) return num / den;
  if (num <= 1e-300) return 0.0;
  throw ContractViolation(std::string(what) + ": nonzero numerator over zero denominator");
}

struct LiftingRatios {
  double value = 0.0;       // int |h_E|^2_{H^1} / int |h|^2_{H^1/2(Gamma)}
  double derivative = 0.0;  // int |d_t h_E|^2_{L^2} / int |d_t h|^2_{H^-1/2(Gamma)}
};

// Measured constants of the harmonic lifting bounds over the sampled
// instants of the trace.
inline LiftingRatios lifting_estimate_check(const BoundaryTrace& trace) {
  const auto& l = trace.layout();
  HarmonicExtender ext(l.grid());
  const std::size_t n = trace.instants();
  std::vector<double> ext_h1(n), bnd_h12(n), ext_dt(n), bnd_dt(n);
  for (std::size_t k = 0; k < n; ++k) {
    ext_h1[k] = h1_norm_sq(ext.extend(l, trace.values(k)));
    bnd_h12[k] = hs_norm_sq(trace.values(k), {0.5});
    const TraceValues dh = trace.time_derivative(k);
    ext_dt[k] = norm_sq(ext.extend(l, dh));
    bnd_dt[k] = hs_norm_sq(dh, {-0.5});
  }
  auto integrate = [&](const std::vector<double>& f) {
    return n == 1 ? f[0] : trapezoid(trace.times(), f);
  };
  return {safe_ratio(integrate(ext_h1), integrate(bnd_h12), "lifting value ratio"),
          safe_ratio(integrate(ext_dt), integrate(bnd_dt), "lifting derivative ratio")};
}

// Sampled inequality lhs <= fixed + c * scaled with an unknown constant c.
struct LinearInequality {
  std::vector<double> times;
  std::vector<double> lhs, fixed, scaled;

  void push(double t, double l, double f, double s) {
    times.push_back(t);
    lhs.push_back(l);
    fixed.push_back(f);
    scaled.push_back(s);
  }

  // Smallest c for which every sample holds; +inf if a sample with nothing
  // to scale is violated.
  double required_constant() const {
    double c = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      const double excess = lhs[k] - fixed[k];
      if (excess <= 0.0) continue;
      if (scaled[k] <= 0.0) return std::numeric_limits<double>::infinity();
      c = std::max(c, excess / scaled[k]);
    }
    return c;
  }

  std::vector<double> margins(double c) const {
    std::vector<double> m(lhs.size());
    for (std::size_t k = 0; k < lhs.size(); ++k) m[k] = lhs[k] - (fixed[k] + c * scaled[k]);
    return m;
  }

  double worst_margin(double c) const {
    double w = -std::numeric_limits<double>::infinity();
    for (double m : margins(c)) w = std::max(w, m);
    return w;
  }
};

// The two parabolic lifting inequalities at every sampled instant:
//   weak:   |h_p|^2 + int |grad h_p|^2          <= |b0|^2 + c int |h|^2_{H^1/2}
//   strong: |h_p|^2_{H1} + int |h_p|^2_{H2}      <= |b0|^2_{H1} + c int (|d_t h|^2_{H^-1/2} + |h|^2_{H^3/2})
struct ParabolicEstimate {
  LinearInequality weak, strong;
};

inline ParabolicEstimate parabolic_estimate_check(const ParabolicRun& run, const BoundaryTrace& trace) {
  ParabolicEstimate e;
  const std::size_t n = run.times.size();
  std::vector<double> grad(n), h2(n), h12(n), bnd_strong(n);
  for (std::size_t k = 0; k < n; ++k) {
    grad[k] = grad_norm_sq(run.states[k]);
    h2[k] = h2_norm_sq(run.states[k]);
    const TraceValues h = trace.at(run.times[k]);
    h12[k] = hs_norm_sq(h, {0.5});
    bnd_strong[k] = hs_norm_sq(trace.time_derivative_at(run.times[k]), {-0.5}) + hs_norm_sq(h, {1.5});
  }
  const auto int_grad = cumulative_trapezoid(run.times, grad);
  const auto int_h2 = cumulative_trapezoid(run.times, h2);
  const auto int_h12 = cumulative_trapezoid(run.times, h12);
  const auto int_strong = cumulative_trapezoid(run.times, bnd_strong);
  const double b0_l2 = norm_sq(run.states.front());
  const double b0_h1 = h1_norm_sq(run.states.front());
  for (std::size_t k = 0; k < n; ++k) {
    e.weak.push(run.times[k], norm_sq(run.states[k]) + int_grad[k], b0_l2, int_h12[k]);
    e.strong.push(run.times[k], h1_norm_sq(run.states[k]) + int_h2[k], b0_h1, int_strong[k]);
  }
  return e;
}

}  // namespace mhd2d
