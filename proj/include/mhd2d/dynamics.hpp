#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mhd2d/lifting.hpp"
#include "mhd2d/spectral.hpp"

namespace mhd2d {

enum class Coupling { single_pass, fixed_point };

struct SolverConfig {
  int nx = 32, ny = 32;
  double dt = 1e-3;
  double horizon = 0.1;
  std::optional<int> truncation;  // velocity Galerkin modes; empty means no truncation
  double picard_tol = 1e-12;      // relative to 1 + |b|
  int picard_max = 60;
  Coupling coupling = Coupling::fixed_point;
  double outer_tol = 1e-12;  // relative to 1 + |u|
  int outer_max = 60;
  double Re = 1.0, Rm = 1.0, S = 1.0;
  double div_clean_threshold = std::numeric_limits<double>::infinity();
  CompatibilityPolicy compatibility = CompatibilityPolicy::reject;

  bool operator==(const SolverConfig&) const = default;
  Grid grid() const { return Grid(nx, ny); }
  int steps() const { return static_cast<int>(std::lround(horizon / dt)); }

  void validate() const {
    std::string bad;
    auto check = [&](bool ok, const char* what) {
      if (!ok) bad += std::string(bad.empty() ? "" : "; ") + what;
    };
    check(nx >= 4 && ny >= 4, "grid.nx and grid.ny must be >= 4");
    check(dt > 0.0, "time.dt must be > 0");
    check(horizon >= dt, "time.T must be >= time.dt");
    check(!truncation || *truncation > 0, "galerkin.n must be positive or 'full'");
    check(picard_tol > 0.0 && outer_tol > 0.0, "tolerances must be > 0");
    check(picard_max > 0 && outer_max > 0, "iteration limits must be > 0");
    check(Re > 0.0 && Rm > 0.0 && S > 0.0, "physics.Re, Rm, S must be > 0");
    if (!bad.empty()) throw InputError("invalid solver configuration: " + bad);
  }
};

struct SimState {
  double t = 0.0;
  VectorField u, b;
  ScalarField p;

  explicit SimState(const Grid& g) : u(g), b(g), p(g) {}
  SimState(double t0, VectorField u0, VectorField b0, ScalarField p0)
      : t(t0), u(std::move(u0)), b(std::move(b0)), p(std::move(p0)) {}
  const Grid& grid() const { return u.grid(); }
  bool operator==(const SimState&) const = default;
};

struct StepReport {
  int picard_iterations = 0;
  double picard_residual = 0.0;
  double contraction = 0.0;  // last measured |d_{j+1}| / |d_j|
  int outer_iterations = 0;
  double outer_residual = 0.0;
  double dt = 0.0;
};

// Body forces f(x, y, t), sampled on faces at the new time level.
struct Forcing {
  std::function<Vec2(double, double, double)> u, b;
};

struct CompatibilityReport {
  double div_u = 0.0, div_b = 0.0;      // max |div| over cells
  double u_trace = 0.0, b_trace = 0.0;  // L2(Gamma) boundary mismatch
  double div_tolerance = 0.0, trace_tolerance = 0.0;
  bool pass() const {
    return div_u <= div_tolerance && div_b <= div_tolerance && u_trace <= trace_tolerance && b_trace <= trace_tolerance;
  }
};

inline double max_face_value(const VectorField& v) {
  double m = 0.0;
  for (int c = 0; c < 2; ++c)
    for (double x : v.comp(c)) m = std::max(m, std::abs(x));
  return m;
}

inline CompatibilityReport compatibility_check(const VectorField& u0, const VectorField& b0, const BoundaryTrace& trace) {
  const auto& l = trace.layout();
  require_same_grid(u0.grid(), l.grid());
  require_same_grid(b0.grid(), l.grid());
  const TraceValues h0 = trace.at(0.0);
  CompatibilityReport r;
  r.div_u = divergence(u0).max_abs();
  r.div_b = divergence(b0).max_abs();
  r.u_trace = trace_residual(u0, l, zero_trace(l));
  r.b_trace = trace_residual(b0, l, h0);
  r.div_tolerance = 1e-9 * (1.0 + std::max(max_face_value(u0), max_face_value(b0)));
  r.trace_tolerance = compatibility_tolerance(l, h0);
  return r;
}

// Makes initial data compatible: u gets zero trace, b the trace at t=0, and
// both are projected onto discretely divergence-free fields.
inline void enforce_compatibility(VectorField& u0, VectorField& b0, const BoundaryTrace& trace) {
  const auto& l = trace.layout();
  LerayProjector leray(l.grid());
  u0.clear_boundary();
  leray.project(u0);
  apply_trace(b0, l, trace.at(0.0));
  leray.project(b0);
}

// Semi-Galerkin time stepper. Caches every factorization that depends only
// on the grid and dt.
class Integrator {
 public:
  Integrator(SolverConfig cfg, BoundaryTrace trace, std::shared_ptr<const SpectralBasis> basis = nullptr,
             Forcing forcing = {})
      : cfg_((cfg.validate(), cfg)),
        grid_(cfg_.grid()),
        dofs_(grid_),
        trace_(std::move(trace)),
        forcing_(std::move(forcing)),
        leray_(grid_),
        basis_(std::move(basis)) {
    require_same_grid(grid_, trace_.layout().grid());
    lap_ = assemble_laplacian(dofs_, VectorField(grid_)).A;
    if (cfg_.truncation) {
      if (!basis_) basis_ = std::make_shared<const SpectralBasis>(build_stokes_basis(grid_, *cfg_.truncation));
      require(basis_->kind() == BasisKind::stokes, "velocity truncation needs a Stokes basis");
      require_same_grid(basis_->grid(), grid_);
      if (basis_->count() < *cfg_.truncation) throw CapacityError("Stokes basis has fewer modes than galerkin.n");
    } else {
      curl_ = stream_curl_matrix(grid_);
      SpMat a = identity_matrix(dofs_.count()) / cfg_.dt - lap_ / cfg_.Re;
      SpMat k = SpMat(curl_.transpose()) * a * curl_;
      stream_solver_.compute(k);
      if (stream_solver_.info() != Eigen::Success) throw SolverError("velocity step: factorization failed");
    }
  }

  const SolverConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  const BoundaryTrace& trace() const { return trace_; }
  const LerayProjector& leray() const { return leray_; }
  bool truncated() const { return cfg_.truncation.has_value(); }
  int modes() const { return cfg_.truncation.value_or(0); }

  // Time of step k; computed from the index so restarts reproduce it.
  double time_of(long k) const { return static_cast<double>(k) * cfg_.dt; }
  long step_index(double t) const { return std::lround(t / cfg_.dt); }

  // Picard iteration for the implicit-Euler magnetic step
  //   (b - b_prev)/dt - L b / Rm + ubar.grad b - b.grad ubar = f_b,
  // with ubar.grad b implicit and b.grad ubar lagged on the previous iterate.
  std::pair<VectorField, StepReport> b_step(const VectorField& u_bar, const VectorField& b_prev, double t_new) const {
    const double dt = cfg_.dt;
    VectorField boundary(grid_);
    apply_trace(boundary, trace_.layout(), trace_.at(t_new));
    const Vec lap_shift = boundary_shift(dofs_, boundary);
    const AffineOperator conv = assemble_convect(dofs_, u_bar, boundary);
    SpMat m = identity_matrix(dofs_.count()) / dt - lap_ / cfg_.Rm + conv.A;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw SolverError("magnetic step: factorization failed");

    Vec base;
    dofs_.gather(b_prev, base);
    base /= dt;
    base += lap_shift / cfg_.Rm - conv.shift + sampled_forcing(forcing_.b, t_new);

    VectorField current = b_prev;
    current.copy_boundary_from(boundary);
    const bool coupled = norm_sq(u_bar) > 0.0;
    StepReport rep;
    rep.dt = dt;
    double prev_delta = 0.0;
    for (int j = 1; j <= cfg_.picard_max; ++j) {
      Vec rhs = base;
      if (coupled) {
        Vec lag;
        dofs_.gather(convect(current, u_bar), lag);
        rhs += lag;
      }
      VectorField next = boundary;
      dofs_.scatter(Vec(lu.solve(rhs)), next);
      const double delta = norm(next - current);
      const double scale = 1.0 + norm(next);
      const double floor = 1e-14 * scale;
      if (j > 1 && prev_delta > floor && delta > floor) rep.contraction = delta / prev_delta;
      rep.picard_iterations = j;
      rep.picard_residual = delta;
      current = std::move(next);
      // Without advection the step is linear and one solve is exact.
      if (delta <= cfg_.picard_tol * scale || !coupled) return {std::move(current), rep};
      prev_delta = delta;
    }
    throw SolverError("Picard iteration did not converge at t=" + format_double(t_new) + " (residual " +
                      format_double(rep.picard_residual) + ", contraction " + format_double(rep.contraction) +
                      "); reduce dt");
  }

  // Velocity step with lagged nonlinearity:
  //   (u - u_prev)/dt - L u / Re + grad p = -ubar.grad ubar + S b.grad b + f_u,
  // solved exactly on the divergence-free subspace (full) or on the span of
  // the first n Stokes modes (truncated). Returns u and the mean-zero p.
  std::pair<VectorField, ScalarField> u_step(const VectorField& b_frozen, const VectorField& u_prev,
                                             const VectorField& u_bar, double t_new) const {
    const double dt = cfg_.dt;
    Vec r;
    dofs_.gather(u_prev, r);
    r /= dt;
    Vec tmp;
    dofs_.gather(convect(u_bar, u_bar), tmp);
    r -= tmp;
    dofs_.gather(convect(b_frozen, b_frozen), tmp);
    r += cfg_.S * tmp;
    r += sampled_forcing(forcing_.u, t_new);

    Vec x;
    if (truncated()) {
      const int n = *cfg_.truncation;
      const auto& xi = basis_->vectors();
      Vec g = grid_.cell_area() * (xi.leftCols(n).transpose() * r);
      for (int i = 0; i < n; ++i) g[i] /= 1.0 / dt + basis_->value(i) / cfg_.Re;
      x = xi.leftCols(n) * g;
    } else {
      Vec psi = stream_solver_.solve(Vec(curl_.transpose() * r));
      x = curl_ * psi;
    }
    VectorField u(grid_);
    dofs_.scatter(x, u);
    // The residual of the momentum equation is the pressure gradient (its
    // gradient part in truncated mode).
    Vec res = r - (x / dt - lap_ * x / cfg_.Re);
    VectorField rf(grid_);
    dofs_.scatter(res, rf);
    ScalarField p = leray_.potential(divergence(rf));
    return {std::move(u), std::move(p)};
  }

  std::pair<SimState, StepReport> coupled_step(const SimState& s) const {
    const double t_new = time_of(step_index(s.t) + 1);
    VectorField u_bar = s.u;
    StepReport total;
    total.dt = cfg_.dt;
    std::vector<double> history;
    double prev_res = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= cfg_.outer_max; ++k) {
      auto [b, rb] = b_step(u_bar, s.b, t_new);
      auto [u, p] = u_step(b, s.u, u_bar, t_new);
      total.picard_iterations = std::max(total.picard_iterations, rb.picard_iterations);
      total.picard_residual = rb.picard_residual;
      total.contraction = rb.contraction;
      total.outer_iterations = k;
      const double res = norm(u - u_bar);
      total.outer_residual = res;
      history.push_back(res);
      if (cfg_.coupling == Coupling::single_pass || res <= cfg_.outer_tol * (1.0 + norm(u))) {
        SimState out(t_new, std::move(u), std::move(b), std::move(p));
        clean_divergence(out.b);
        return {std::move(out), total};
      }
      if (res > prev_res)
        u_bar.axpy(0.5, u - u_bar);
      else
        u_bar = std::move(u);
      prev_res = res;
    }
    std::string h;
    for (double x : history) h += ' ' + format_double(x);
    throw SolverError("outer coupling did not converge at t=" + format_double(t_new) + "; residuals:" + h);
  }

  // Starting state for a run: compatibility enforced or checked, velocity
  // projected onto the Galerkin space in truncated mode.
  SimState initial_state(VectorField u0, VectorField b0) const {
    auto rep = compatibility_check(u0, b0, trace_);
    if (!rep.pass()) {
      if (cfg_.compatibility == CompatibilityPolicy::reject)
        throw InputError("initial data incompatible: div u " + format_double(rep.div_u) + ", div b " +
                         format_double(rep.div_b) + ", u trace " + format_double(rep.u_trace) + ", b trace " +
                         format_double(rep.b_trace));
      enforce_compatibility(u0, b0, trace_);
    }
    if (truncated()) u0 = project(*basis_, u0, *cfg_.truncation).field;
    return SimState(0.0, std::move(u0), std::move(b0), ScalarField(grid_));
  }

  using Observer = std::function<void(const SimState&, const StepReport*)>;

  // Steps from s to the configured horizon. The observer sees the start
  // state (with no report) and every accepted step.
  SimState advance(SimState s, const Observer& observe = {}, std::vector<StepReport>* reports = nullptr) const {
    if (observe) observe(s, nullptr);
    const long last = cfg_.steps();
    for (long k = step_index(s.t); k < last; ++k) {
      auto [next, rep] = coupled_step(s);
      s = std::move(next);
      if (reports) reports->push_back(rep);
      if (observe) observe(s, &rep);
    }
    return s;
  }

 private:
  Vec sampled_forcing(const std::function<Vec2(double, double, double)>& f, double t) const {
    if (!f) return Vec::Zero(dofs_.count());
    Vec out;
    dofs_.gather(VectorField::sample(grid_, [&](double x, double y) { return f(x, y, t); }), out);
    return out;
  }

  // Interior-only projection of b. The boundary faces hold the trace and are
  // untouched, so this equals cleaning b - h_E against the fixed lift.
  void clean_divergence(VectorField& b) const {
    if (divergence(b).max_abs() > cfg_.div_clean_threshold) leray_.project(b);
  }

  SolverConfig cfg_;
  Grid grid_;
  FaceDofs dofs_;
  BoundaryTrace trace_;
  Forcing forcing_;
  LerayProjector leray_;
  std::shared_ptr<const SpectralBasis> basis_;
  SpMat lap_;
  SpMat curl_;
  Eigen::SimplicialLDLT<SpMat> stream_solver_;
};

// ---- checkpoints ------------------------------------------------------------

inline constexpr std::string_view kCheckpointMagic = "MHDCKPT1";

namespace detail {
inline void put_field(BinaryWriter& w, const VectorField& v) {
  for (int c = 0; c < 2; ++c) {
    for (double x : v.comp(c)) w.f64(x);
    for (int side = 0; side < 2; ++side)
      for (double x : v.wall(c, side)) w.f64(x);
  }
}
inline void get_field(BinaryReader& r, VectorField& v) {
  for (int c = 0; c < 2; ++c) {
    for (double& x : v.comp(c)) x = r.f64();
    for (int side = 0; side < 2; ++side)
      for (double& x : v.wall(c, side)) x = r.f64();
  }
}
}  // namespace detail

inline std::string encode_checkpoint(const SimState& s, const SolverConfig& cfg) {
  BinaryWriter w;
  w.bytes(kCheckpointMagic);
  w.i64(cfg.nx);
  w.i64(cfg.ny);
  w.f64(s.t);
  w.f64(cfg.dt);
  w.i64(cfg.truncation.value_or(-1));
  detail::put_field(w, s.u);
  detail::put_field(w, s.b);
  for (double x : s.p.values()) w.f64(x);
  return w.data();
}

inline SimState decode_checkpoint(std::string_view data, const SolverConfig& cfg) {
  BinaryReader r(data);
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) throw InputError("not a checkpoint file");
  const auto nx = r.i64(), ny = r.i64();
  const double t = r.f64(), dt = r.f64();
  const auto n = r.i64();
  if (nx != cfg.nx || ny != cfg.ny || dt != cfg.dt || n != cfg.truncation.value_or(-1))
    throw InputError("checkpoint header does not match the configuration");
  Grid g(cfg.nx, cfg.ny);
  SimState s(g);
  s.t = t;
  detail::get_field(r, s.u);
  detail::get_field(r, s.b);
  for (double& x : s.p.values()) x = r.f64();
  if (!r.at_end()) throw InputError("checkpoint has trailing bytes");
  return s;
}

inline void write_checkpoint(const std::filesystem::path& path, const SimState& s, const SolverConfig& cfg) {
  atomic_write(path, encode_checkpoint(s, cfg));
}

inline SimState read_checkpoint(const std::filesystem::path& path, const SolverConfig& cfg) {
  return decode_checkpoint(read_file(path), cfg);
}

}  // namespace mhd2d
