#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mhd2d/errors.hpp"

namespace mhd2d {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Uniform MAC grid on the unit square.
class Grid {
 public:
  Grid(int nx, int ny) : nx_(nx), ny_(ny) {
    if (nx < 4 || ny < 4) throw ShapeError("grid needs at least 4 cells per axis");
    dx_ = 1.0 / nx;
    dy_ = 1.0 / ny;
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double cell_area() const { return dx_ * dy_; }

  int cells() const { return nx_ * ny_; }
  int interior_nodes() const { return (nx_ - 1) * (ny_ - 1); }
  int interior_faces() const { return (nx_ - 1) * ny_ + nx_ * (ny_ - 1); }
  bool square_cells() const { return nx_ == ny_; }

  bool operator==(const Grid& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

 private:
  int nx_, ny_;
  double dx_, dy_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw ShapeError("fields live on different grids");
}

// One MAC component seen in its own frame. Index a runs along the direction
// the component is normal to (node-centred, 0..na); index b runs along the
// other direction (cell-centred, 0..nb-1). Component 0 is the x-component
// (a = i, b = j); component 1 is the y-component (a = j, b = i).
struct ComponentShape {
  int na, nb;
  double dn, dc;

  static ComponentShape of(const Grid& g, int c) {
    return c == 0 ? ComponentShape{g.nx(), g.ny(), g.dx(), g.dy()}
                  : ComponentShape{g.ny(), g.nx(), g.dy(), g.dx()};
  }
  int size() const { return (na + 1) * nb; }
  int index(int a, int b) const { return a * nb + b; }
  bool on_boundary(int a) const { return a == 0 || a == na; }
  // Trapezoid weight along the node direction.
  double weight(int a) const { return on_boundary(a) ? 0.5 : 1.0; }
};

inline Vec2 face_position(const Grid& g, int c, int a, int b) {
  if (c == 0) return {a * g.dx(), (b + 0.5) * g.dy()};
  return {(b + 0.5) * g.dx(), a * g.dy()};
}

// Wall point carrying the tangential value of component c next to row b=0
// (side 0) or b=nb-1 (side 1).
inline Vec2 wall_position(const Grid& g, int c, int side, int a) {
  if (c == 0) return {a * g.dx(), side == 0 ? 0.0 : 1.0};
  return {side == 0 ? 0.0 : 1.0, a * g.dy()};
}

class ScalarField {
 public:
  explicit ScalarField(const Grid& g) : grid_(g), v_(static_cast<std::size_t>(g.cells()), 0.0) {}

  const Grid& grid() const { return grid_; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i * grid_.ny() + j)]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i * grid_.ny() + j)]; }

  static Vec2 position(const Grid& g, int i, int j) { return {(i + 0.5) * g.dx(), (j + 0.5) * g.dy()}; }

  template <class F>
  static ScalarField sample(const Grid& g, F&& f) {
    ScalarField s(g);
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j) {
        auto p = position(g, i, j);
        s(i, j) = f(p.x, p.y);
      }
    return s;
  }

  double mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
  }
  void subtract_mean() {
    const double m = mean();
    for (double& x : v_) x -= m;
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  ScalarField& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }
  bool operator==(const ScalarField& o) const { return grid_ == o.grid_ && v_ == o.v_; }

 private:
  Grid grid_;
  std::vector<double> v_;
};

// MAC vector field. Besides the face values (boundary normal faces
// included) it carries the tangential boundary values on the walls, which
// close the ghost-cell stencils. A field with all boundary data zero
// vanishes on the boundary.
class VectorField {
 public:
  explicit VectorField(const Grid& g) : grid_(g) {
    for (int c = 0; c < 2; ++c) {
      auto s = ComponentShape::of(g, c);
      comp_[c].assign(static_cast<std::size_t>(s.size()), 0.0);
      wall_[2 * c].assign(static_cast<std::size_t>(s.na + 1), 0.0);
      wall_[2 * c + 1].assign(static_cast<std::size_t>(s.na + 1), 0.0);
    }
  }

  const Grid& grid() const { return grid_; }
  ComponentShape shape(int c) const { return ComponentShape::of(grid_, c); }

  std::span<double> comp(int c) { return comp_[c]; }
  std::span<const double> comp(int c) const { return comp_[c]; }
  std::span<double> wall(int c, int side) { return wall_[2 * c + side]; }
  std::span<const double> wall(int c, int side) const { return wall_[2 * c + side]; }

  double& at(int c, int a, int b) { return comp_[c][static_cast<std::size_t>(a * shape(c).nb + b)]; }
  double at(int c, int a, int b) const { return comp_[c][static_cast<std::size_t>(a * shape(c).nb + b)]; }
  // Grid-frame accessors: x-face (i,j) and y-face (i,j).
  double& x(int i, int j) { return at(0, i, j); }
  double x(int i, int j) const { return at(0, i, j); }
  double& y(int i, int j) { return at(1, j, i); }
  double y(int i, int j) const { return at(1, j, i); }

  // Samples f at every face and at the wall points.
  template <class F>
  static VectorField sample(const Grid& g, F&& f) {
    VectorField v(g);
    for (int c = 0; c < 2; ++c) {
      auto s = v.shape(c);
      for (int a = 0; a <= s.na; ++a) {
        for (int b = 0; b < s.nb; ++b) {
          auto p = face_position(g, c, a, b);
          Vec2 val = f(p.x, p.y);
          v.at(c, a, b) = c == 0 ? val.x : val.y;
        }
        for (int side = 0; side < 2; ++side) {
          auto p = wall_position(g, c, side, a);
          Vec2 val = f(p.x, p.y);
          v.wall(c, side)[static_cast<std::size_t>(a)] = c == 0 ? val.x : val.y;
        }
      }
    }
    return v;
  }

  void clear_boundary() {
    for (int c = 0; c < 2; ++c) {
      auto s = shape(c);
      for (int b = 0; b < s.nb; ++b) {
        at(c, 0, b) = 0.0;
        at(c, s.na, b) = 0.0;
      }
      std::fill(wall_[2 * c].begin(), wall_[2 * c].end(), 0.0);
      std::fill(wall_[2 * c + 1].begin(), wall_[2 * c + 1].end(), 0.0);
    }
  }

  // Copies normal boundary faces and wall values from another field.
  void copy_boundary_from(const VectorField& o) {
    require_same_grid(grid_, o.grid_);
    for (int c = 0; c < 2; ++c) {
      auto s = shape(c);
      for (int b = 0; b < s.nb; ++b) {
        at(c, 0, b) = o.at(c, 0, b);
        at(c, s.na, b) = o.at(c, s.na, b);
      }
      wall_[2 * c] = o.wall_[2 * c];
      wall_[2 * c + 1] = o.wall_[2 * c + 1];
    }
  }

  template <class Op>
  VectorField& zip(const VectorField& o, Op op) {
    require_same_grid(grid_, o.grid_);
    for (int k = 0; k < 2; ++k)
      for (std::size_t n = 0; n < comp_[k].size(); ++n) comp_[k][n] = op(comp_[k][n], o.comp_[k][n]);
    for (int k = 0; k < 4; ++k)
      for (std::size_t n = 0; n < wall_[k].size(); ++n) wall_[k][n] = op(wall_[k][n], o.wall_[k][n]);
    return *this;
  }
  VectorField& operator+=(const VectorField& o) { return zip(o, [](double a, double b) { return a + b; }); }
  VectorField& operator-=(const VectorField& o) { return zip(o, [](double a, double b) { return a - b; }); }
  VectorField& axpy(double s, const VectorField& o) {
    return zip(o, [s](double a, double b) { return a + s * b; });
  }
  VectorField& operator*=(double s) {
    for (auto& c : comp_)
      for (double& x : c) x *= s;
    for (auto& w : wall_)
      for (double& x : w) x *= s;
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

  bool operator==(const VectorField& o) const {
    return grid_ == o.grid_ && comp_ == o.comp_ && wall_ == o.wall_;
  }

  bool all_finite() const {
    for (const auto& c : comp_)
      for (double x : c)
        if (!std::isfinite(x)) return false;
    for (const auto& w : wall_)
      for (double x : w)
        if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  Grid grid_;
  std::array<std::vector<double>, 2> comp_;
  std::array<std::vector<double>, 4> wall_;
};

// Numbering of the interior faces, which are the unknowns of every
// Dirichlet problem on the grid.
class FaceDofs {
 public:
  explicit FaceDofs(const Grid& g) : grid_(g) {
    shape_[0] = ComponentShape::of(g, 0);
    shape_[1] = ComponentShape::of(g, 1);
    offset_[0] = 0;
    offset_[1] = (shape_[0].na - 1) * shape_[0].nb;
    count_ = offset_[1] + (shape_[1].na - 1) * shape_[1].nb;
  }
  int count() const { return count_; }
  int offset(int c) const { return offset_[c]; }
  int block(int c) const { return (shape_[c].na - 1) * shape_[c].nb; }
  int index(int c, int a, int b) const { return offset_[c] + (a - 1) * shape_[c].nb + b; }
  const ComponentShape& shape(int c) const { return shape_[c]; }
  const Grid& grid() const { return grid_; }

  template <class Vec>
  void gather(const VectorField& v, Vec& out) const {
    out.resize(count_);
    for (int c = 0; c < 2; ++c) {
      const auto& s = shape_[c];
      for (int a = 1; a < s.na; ++a)
        for (int b = 0; b < s.nb; ++b) out[index(c, a, b)] = v.at(c, a, b);
    }
  }
  template <class Vec>
  void scatter(const Vec& x, VectorField& v) const {
    for (int c = 0; c < 2; ++c) {
      const auto& s = shape_[c];
      for (int a = 1; a < s.na; ++a)
        for (int b = 0; b < s.nb; ++b) v.at(c, a, b) = x[index(c, a, b)];
    }
  }

 private:
  Grid grid_;
  std::array<ComponentShape, 2> shape_{};
  std::array<int, 2> offset_{};
  int count_ = 0;
};

// ---- inner products and norms -------------------------------------------

inline double dot(const ScalarField& p, const ScalarField& q) {
  require_same_grid(p.grid(), q.grid());
  double s = 0.0;
  auto a = p.values();
  auto b = q.values();
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * p.grid().cell_area();
}

inline double norm_sq(const ScalarField& p) { return dot(p, p); }

// Face quadrature with trapezoid weights along each component's normal
// direction; exact for the constant field.
inline double dot(const VectorField& v, const VectorField& w) {
  require_same_grid(v.grid(), w.grid());
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    auto sh = v.shape(c);
    auto vc = v.comp(c);
    auto wc = w.comp(c);
    for (int a = 0; a <= sh.na; ++a) {
      double row = 0.0;
      for (int b = 0; b < sh.nb; ++b) row += vc[sh.index(a, b)] * wc[sh.index(a, b)];
      s += sh.weight(a) * row;
    }
  }
  return s * v.grid().cell_area();
}

inline double norm_sq(const VectorField& v) { return dot(v, v); }
inline double norm(const VectorField& v) { return std::sqrt(norm_sq(v)); }

// Discrete Dirichlet energy. The half-cell edge between the last row and the
// wall enters with half weight, so for fields vanishing on the boundary
// grad_norm_sq(f) == -dot(laplacian(f), f) holds exactly.
inline double grad_norm_sq(const VectorField& v) {
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    auto sh = v.shape(c);
    auto f = v.comp(c);
    auto lo = v.wall(c, 0);
    auto hi = v.wall(c, 1);
    const double area = sh.dn * sh.dc;
    for (int a = 0; a < sh.na; ++a)
      for (int b = 0; b < sh.nb; ++b) {
        const double d = (f[sh.index(a + 1, b)] - f[sh.index(a, b)]) / sh.dn;
        s += d * d * area;
      }
    for (int a = 0; a <= sh.na; ++a) {
      double row = 0.0;
      for (int b = 0; b + 1 < sh.nb; ++b) {
        const double d = (f[sh.index(a, b + 1)] - f[sh.index(a, b)]) / sh.dc;
        row += d * d * area;
      }
      const double half = 0.5 * sh.dc;
      const double dl = (f[sh.index(a, 0)] - lo[a]) / half;
      const double dh = (hi[a] - f[sh.index(a, sh.nb - 1)]) / half;
      row += (dl * dl + dh * dh) * half * sh.dn;
      s += sh.weight(a) * row;
    }
  }
  return s;
}

inline double h1_norm_sq(const VectorField& v) { return norm_sq(v) + grad_norm_sq(v); }

// Sum of squared second derivatives (f_xx^2 + f_yy^2 + 2 f_xy^2) of both
// components. Differences across the wall use the half-cell step to the
// wall value, as the Laplacian does, so for fields vanishing on the boundary
// hessian_norm_sq(f) == norm_sq(laplacian(f)) by summation by parts.
inline double hessian_norm_sq(const VectorField& v) {
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    auto sh = v.shape(c);
    auto f = v.comp(c);
    auto lo = v.wall(c, 0);
    auto hi = v.wall(c, 1);
    const double area = sh.dn * sh.dc;
    const double half = 0.5 * sh.dc;
    auto at = [&](int a, int b) { return f[sh.index(a, b)]; };
    // First difference across the edge below row b (b = 0 and b = nb are walls).
    auto dc = [&](int a, int b) {
      if (b == 0) return (at(a, 0) - lo[a]) / half;
      if (b == sh.nb) return (hi[a] - at(a, sh.nb - 1)) / half;
      return (at(a, b) - at(a, b - 1)) / sh.dc;
    };
    for (int a = 1; a < sh.na; ++a)
      for (int b = 0; b < sh.nb; ++b) {
        const double d = (at(a + 1, b) - 2 * at(a, b) + at(a - 1, b)) / (sh.dn * sh.dn);
        s += d * d * area;
      }
    for (int a = 0; a <= sh.na; ++a) {
      double row = 0.0;
      for (int b = 0; b < sh.nb; ++b) {
        const double d = (dc(a, b + 1) - dc(a, b)) / sh.dc;
        row += d * d * area;
      }
      s += sh.weight(a) * row;
    }
    for (int a = 0; a < sh.na; ++a)
      for (int b = 0; b <= sh.nb; ++b) {
        const double d = (dc(a + 1, b) - dc(a, b)) / sh.dn;
        const double len = (b == 0 || b == sh.nb) ? half : sh.dc;
        s += 2 * d * d * sh.dn * len;
      }
  }
  return s;
}

inline double h2_norm_sq(const VectorField& v) { return h1_norm_sq(v) + hessian_norm_sq(v); }

// Cell-centre interpolant of both components.
inline std::pair<ScalarField, ScalarField> to_centers(const VectorField& v) {
  const Grid& g = v.grid();
  ScalarField ux(g), uy(g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      ux(i, j) = 0.5 * (v.x(i, j) + v.x(i + 1, j));
      uy(i, j) = 0.5 * (v.y(i, j) + v.y(i, j + 1));
    }
  return {std::move(ux), std::move(uy)};
}

inline double lp_norm(const VectorField& v, double p) {
  auto [ux, uy] = to_centers(v);
  double s = 0.0;
  auto a = ux.values();
  auto b = uy.values();
  for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(a[k] * a[k] + b[k] * b[k], 0.5 * p);
  return std::pow(s * v.grid().cell_area(), 1.0 / p);
}

inline double max_norm(const VectorField& v) {
  auto [ux, uy] = to_centers(v);
  double m = 0.0;
  auto a = ux.values();
  auto b = uy.values();
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::hypot(a[k], b[k]));
  return m;
}

}  // namespace mhd2d
