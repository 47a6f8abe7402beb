#pragma once

#include <cmath>
#include <vector>

#include "mhd2d/grid.hpp"

namespace mhd2d {

// Dirichlet values for the cell-centred Laplacian, given at the midpoints
// of the boundary edges (bottom/top: nx values, left/right: ny values).
struct ScalarClosure {
  std::vector<double> bottom, top, left, right;

  static ScalarClosure zero(const Grid& g) {
    return {std::vector<double>(g.nx(), 0.0), std::vector<double>(g.nx(), 0.0),
            std::vector<double>(g.ny(), 0.0), std::vector<double>(g.ny(), 0.0)};
  }
  template <class F>
  static ScalarClosure sample(const Grid& g, F&& f) {
    ScalarClosure c = zero(g);
    for (int i = 0; i < g.nx(); ++i) {
      c.bottom[i] = f((i + 0.5) * g.dx(), 0.0);
      c.top[i] = f((i + 0.5) * g.dx(), 1.0);
    }
    for (int j = 0; j < g.ny(); ++j) {
      c.left[j] = f(0.0, (j + 0.5) * g.dy());
      c.right[j] = f(1.0, (j + 0.5) * g.dy());
    }
    return c;
  }
};

namespace stencil {

// Ghost closure used throughout: the ghost value mirrors the first interior
// value through the wall value, ghost = 2 g - f. This keeps the Laplacian
// symmetric and the Dirichlet energy identity exact.

// Emits one row of the component Laplacian at interior position (a, b).
// `term(coef, a2, b2)` references the component value at (a2, b2), which may
// be a boundary face; `known(value)` is a data contribution.
template <class Term, class Known>
void laplacian_row(const ComponentShape& s, int a, int b, std::span<const double> lo,
                   std::span<const double> hi, Term&& term, Known&& known) {
  const double cn = 1.0 / (s.dn * s.dn);
  const double cc = 1.0 / (s.dc * s.dc);
  term(cn, a - 1, b);
  term(cn, a + 1, b);
  term(-2.0 * cn - 2.0 * cc, a, b);
  if (b > 0) {
    term(cc, a, b - 1);
  } else {
    term(-cc, a, b);
    known(2.0 * cc * lo[a]);
  }
  if (b + 1 < s.nb) {
    term(cc, a, b + 1);
  } else {
    term(-cc, a, b);
    known(2.0 * cc * hi[a]);
  }
}

// One row of the advection operator for component c of f, advected by the
// field `adv`. Flux form over the control volume of the face with centred
// averages, minus half the control-volume divergence of `adv` times f. The
// correction makes the operator skew-symmetric for any advecting field with
// zero normal flux through the walls, and vanishes when adv is
// divergence-free.
template <class Term, class Known>
void convect_row(const VectorField& adv, int c, int a, int b, std::span<const double> lo,
                 std::span<const double> hi, Term&& term, Known&& known) {
  const ComponentShape s = adv.shape(c);
  const ComponentShape o = adv.shape(1 - c);
  auto same = adv.comp(c);
  auto other = adv.comp(1 - c);
  const double fe = 0.5 * (same[s.index(a, b)] + same[s.index(a + 1, b)]);
  const double fw = 0.5 * (same[s.index(a - 1, b)] + same[s.index(a, b)]);
  const double fn = 0.5 * (other[o.index(b + 1, a - 1)] + other[o.index(b + 1, a)]);
  const double fs = 0.5 * (other[o.index(b, a - 1)] + other[o.index(b, a)]);
  const double div = (fe - fw) / s.dn + (fn - fs) / s.dc;

  const double en = 0.5 / s.dn;
  const double ec = 0.5 / s.dc;
  term(fe * en, a, b);
  term(fe * en, a + 1, b);
  term(-fw * en, a - 1, b);
  term(-fw * en, a, b);
  if (b + 1 < s.nb) {
    term(fn * ec, a, b);
    term(fn * ec, a, b + 1);
  } else {
    known(fn / s.dc * hi[a]);
  }
  if (b > 0) {
    term(-fs * ec, a, b - 1);
    term(-fs * ec, a, b);
  } else {
    known(-fs / s.dc * lo[a]);
  }
  term(-0.5 * div, a, b);
}

// Evaluates a row-emitting stencil on a concrete field component.
struct Evaluator {
  const ComponentShape& s;
  std::span<const double> f;
  double acc = 0.0;
  void term(double coef, int a, int b) { acc += coef * f[s.index(a, b)]; }
  void known(double v) { acc += v; }
};

}  // namespace stencil

inline ScalarField divergence(const VectorField& v) {
  const Grid& g = v.grid();
  ScalarField d(g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      d(i, j) = (v.x(i + 1, j) - v.x(i, j)) / g.dx() + (v.y(i, j + 1) - v.y(i, j)) / g.dy();
  return d;
}

// Face-centred gradient on interior faces; boundary faces and walls are 0.
inline VectorField gradient(const ScalarField& s) {
  const Grid& g = s.grid();
  VectorField v(g);
  for (int i = 1; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) v.x(i, j) = (s(i, j) - s(i - 1, j)) / g.dx();
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 1; j < g.ny(); ++j) v.y(i, j) = (s(i, j) - s(i, j - 1)) / g.dy();
  return v;
}

inline ScalarField laplacian(const ScalarField& f, const ScalarClosure& bc) {
  const Grid& g = f.grid();
  if (static_cast<int>(bc.bottom.size()) != g.nx() || static_cast<int>(bc.top.size()) != g.nx() ||
      static_cast<int>(bc.left.size()) != g.ny() || static_cast<int>(bc.right.size()) != g.ny())
    throw ContractViolation("laplacian: boundary closure does not match the grid");
  ScalarField out(g);
  const double cx = 1.0 / (g.dx() * g.dx());
  const double cy = 1.0 / (g.dy() * g.dy());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      const double c = f(i, j);
      const double w = i > 0 ? f(i - 1, j) : 2.0 * bc.left[j] - c;
      const double e = i + 1 < g.nx() ? f(i + 1, j) : 2.0 * bc.right[j] - c;
      const double s = j > 0 ? f(i, j - 1) : 2.0 * bc.bottom[i] - c;
      const double n = j + 1 < g.ny() ? f(i, j + 1) : 2.0 * bc.top[i] - c;
      out(i, j) = (w - 2.0 * c + e) * cx + (s - 2.0 * c + n) * cy;
    }
  return out;
}

// Componentwise Laplacian on interior faces, closed by the field's own
// boundary data. The result vanishes on the boundary.
inline VectorField laplacian(const VectorField& f) {
  VectorField out(f.grid());
  for (int c = 0; c < 2; ++c) {
    const ComponentShape s = f.shape(c);
    auto lo = f.wall(c, 0);
    auto hi = f.wall(c, 1);
    for (int a = 1; a < s.na; ++a)
      for (int b = 0; b < s.nb; ++b) {
        stencil::Evaluator ev{s, f.comp(c)};
        stencil::laplacian_row(
            s, a, b, lo, hi, [&](double k, int a2, int b2) { ev.term(k, a2, b2); },
            [&](double v) { ev.known(v); });
        out.at(c, a, b) = ev.acc;
      }
  }
  return out;
}

// a . grad f, evaluated on interior faces.
inline VectorField convect(const VectorField& adv, const VectorField& f) {
  require_same_grid(adv.grid(), f.grid());
  VectorField out(f.grid());
  for (int c = 0; c < 2; ++c) {
    const ComponentShape s = f.shape(c);
    auto lo = f.wall(c, 0);
    auto hi = f.wall(c, 1);
    for (int a = 1; a < s.na; ++a)
      for (int b = 0; b < s.nb; ++b) {
        stencil::Evaluator ev{s, f.comp(c)};
        stencil::convect_row(
            adv, c, a, b, lo, hi, [&](double k, int a2, int b2) { ev.term(k, a2, b2); },
            [&](double v) { ev.known(v); });
        out.at(c, a, b) = ev.acc;
      }
  }
  return out;
}

struct IdentityResiduals {
  double lorentz = 0.0;    // (curl b) x b  vs  b.grad b - grad |b|^2 / 2
  double curl_curl = 0.0;  // curl curl b  vs  grad div b - lap b
  double induction = 0.0;  // curl (u x b)  vs  b.grad u - u.grad b + u div b - b div u
};

// Evaluates the three planar vector identities with cell-centred central
// differences. Each side is discretized independently, so the residuals
// measure truncation error (second order) on smooth fields. Stencils are
// kept away from the walls, where the wide differences would need data
// outside the square.
inline IdentityResiduals identity_residuals(const VectorField& b, const VectorField& u) {
  require_same_grid(b.grid(), u.grid());
  const Grid& g = b.grid();
  const int nx = g.nx(), ny = g.ny();
  if (nx < 6 || ny < 6) throw ShapeError("identity_residuals needs at least 6 cells per axis");
  auto [bx, by] = to_centers(b);
  auto [ux, uy] = to_centers(u);
  const double hx = g.dx(), hy = g.dy();

  auto ddx = [&](const ScalarField& f, int i, int j) { return (f(i + 1, j) - f(i - 1, j)) / (2 * hx); };
  auto ddy = [&](const ScalarField& f, int i, int j) { return (f(i, j + 1) - f(i, j - 1)) / (2 * hy); };
  auto d2x = [&](const ScalarField& f, int i, int j) {
    return (f(i + 1, j) - 2 * f(i, j) + f(i - 1, j)) / (hx * hx);
  };
  auto d2y = [&](const ScalarField& f, int i, int j) {
    return (f(i, j + 1) - 2 * f(i, j) + f(i, j - 1)) / (hy * hy);
  };

  ScalarField bsq(g), omega(g), divb(g), divu(g), cross(g);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      bsq(i, j) = bx(i, j) * bx(i, j) + by(i, j) * by(i, j);
      cross(i, j) = ux(i, j) * by(i, j) - uy(i, j) * bx(i, j);
    }
  for (int i = 1; i < nx - 1; ++i)
    for (int j = 1; j < ny - 1; ++j) {
      omega(i, j) = ddx(by, i, j) - ddy(bx, i, j);
      divb(i, j) = ddx(bx, i, j) + ddy(by, i, j);
      divu(i, j) = ddx(ux, i, j) + ddy(uy, i, j);
    }

  IdentityResiduals r;
  const double area = g.cell_area();
  for (int i = 1; i < nx - 1; ++i)
    for (int j = 1; j < ny - 1; ++j) {
      const double l1 = -omega(i, j) * by(i, j);
      const double l2 = omega(i, j) * bx(i, j);
      const double r1 = bx(i, j) * ddx(bx, i, j) + by(i, j) * ddy(bx, i, j) - 0.5 * ddx(bsq, i, j);
      const double r2 = bx(i, j) * ddx(by, i, j) + by(i, j) * ddy(by, i, j) - 0.5 * ddy(bsq, i, j);
      r.lorentz += ((l1 - r1) * (l1 - r1) + (l2 - r2) * (l2 - r2)) * area;

      const double c1 = ddy(cross, i, j);
      const double c2 = -ddx(cross, i, j);
      const double e1 = bx(i, j) * ddx(ux, i, j) + by(i, j) * ddy(ux, i, j) - ux(i, j) * ddx(bx, i, j) -
                        uy(i, j) * ddy(bx, i, j) + ux(i, j) * divb(i, j) - bx(i, j) * divu(i, j);
      const double e2 = bx(i, j) * ddx(uy, i, j) + by(i, j) * ddy(uy, i, j) - ux(i, j) * ddx(by, i, j) -
                        uy(i, j) * ddy(by, i, j) + uy(i, j) * divb(i, j) - by(i, j) * divu(i, j);
      r.induction += ((c1 - e1) * (c1 - e1) + (c2 - e2) * (c2 - e2)) * area;
    }
  for (int i = 2; i < nx - 2; ++i)
    for (int j = 2; j < ny - 2; ++j) {
      const double l1 = ddy(omega, i, j);
      const double l2 = -ddx(omega, i, j);
      const double r1 = ddx(divb, i, j) - d2x(bx, i, j) - d2y(bx, i, j);
      const double r2 = ddy(divb, i, j) - d2x(by, i, j) - d2y(by, i, j);
      r.curl_curl += ((l1 - r1) * (l1 - r1) + (l2 - r2) * (l2 - r2)) * area;
    }
  r.lorentz = std::sqrt(r.lorentz);
  r.curl_curl = std::sqrt(r.curl_curl);
  r.induction = std::sqrt(r.induction);
  return r;
}

}  // namespace mhd2d
