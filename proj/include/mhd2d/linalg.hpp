#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mhd2d/operators.hpp"

namespace mhd2d {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

// op(f) restricted to interior faces equals A * f_interior + shift, where the
// boundary data of f is fixed.
struct AffineOperator {
  SpMat A;
  Vec shift;
};

namespace detail {

template <class RowFn>
AffineOperator assemble_faces(const FaceDofs& dofs, const VectorField& boundary, RowFn&& row) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(dofs.count()) * 12);
  Vec shift = Vec::Zero(dofs.count());
  for (int c = 0; c < 2; ++c) {
    const ComponentShape& s = dofs.shape(c);
    auto f = boundary.comp(c);
    for (int a = 1; a < s.na; ++a)
      for (int b = 0; b < s.nb; ++b) {
        const int r = dofs.index(c, a, b);
        auto term = [&](double k, int a2, int b2) {
          if (s.on_boundary(a2))
            shift[r] += k * f[s.index(a2, b2)];
          else
            t.emplace_back(r, dofs.index(c, a2, b2), k);
        };
        auto known = [&](double v) { shift[r] += v; };
        row(c, a, b, term, known);
      }
  }
  SpMat A(dofs.count(), dofs.count());
  A.setFromTriplets(t.begin(), t.end());
  return {std::move(A), std::move(shift)};
}

}  // namespace detail

// Vector Laplacian on interior faces with the boundary data of `boundary`.
inline AffineOperator assemble_laplacian(const FaceDofs& dofs, const VectorField& boundary) {
  return detail::assemble_faces(dofs, boundary, [&](int c, int a, int b, auto& term, auto& known) {
    stencil::laplacian_row(dofs.shape(c), a, b, boundary.wall(c, 0), boundary.wall(c, 1), term, known);
  });
}

// f -> convect(adv, f) on interior faces, boundary data of f from `boundary`.
inline AffineOperator assemble_convect(const FaceDofs& dofs, const VectorField& adv, const VectorField& boundary) {
  return detail::assemble_faces(dofs, boundary, [&](int c, int a, int b, auto& term, auto& known) {
    stencil::convect_row(adv, c, a, b, boundary.wall(c, 0), boundary.wall(c, 1), term, known);
  });
}

inline SpMat identity_matrix(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

// Discrete curl of a stream function living on the interior nodes (zero on
// boundary nodes). Its range is exactly the divergence-free fields with zero
// normal flux through the walls.
inline SpMat stream_curl_matrix(const Grid& g) {
  FaceDofs dofs(g);
  const int nx = g.nx(), ny = g.ny();
  auto node = [&](int i, int j) { return (i - 1) * (ny - 1) + (j - 1); };
  Triplets t;
  for (int i = 1; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const int r = dofs.index(0, i, j);
      if (j + 1 <= ny - 1) t.emplace_back(r, node(i, j + 1), 1.0 / g.dy());
      if (j >= 1) t.emplace_back(r, node(i, j), -1.0 / g.dy());
    }
  for (int i = 0; i < nx; ++i)
    for (int j = 1; j < ny; ++j) {
      const int r = dofs.index(1, j, i);
      if (i + 1 <= nx - 1) t.emplace_back(r, node(i + 1, j), -1.0 / g.dx());
      if (i >= 1) t.emplace_back(r, node(i, j), 1.0 / g.dx());
    }
  SpMat C(dofs.count(), g.interior_nodes());
  C.setFromTriplets(t.begin(), t.end());
  return C;
}

// Divergence-free field from a stream function sampled on all grid nodes.
template <class F>
VectorField curl_of_stream(const Grid& g, F&& psi) {
  VectorField v(g);
  for (int i = 0; i <= g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      v.x(i, j) = (psi(i * g.dx(), (j + 1) * g.dy()) - psi(i * g.dx(), j * g.dy())) / g.dy();
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j <= g.ny(); ++j)
      v.y(i, j) = -(psi((i + 1) * g.dx(), j * g.dy()) - psi(i * g.dx(), j * g.dy())) / g.dx();
  return v;
}

// Smooth divergence-free field with zero trace: the curl of
// s * sum_{k,l<=modes} c_kl sin(k pi x) sin(l pi y) with s = sin(pi x) sin(pi y) and
// c_kl ~ N(0, (amplitude/modes)^2), so the stream function and its gradient
// vanish on the walls.
inline VectorField smooth_solenoidal(const Grid& g, std::mt19937_64& rng, double amplitude = 1.0, int modes = 3) {
  using std::numbers::pi;
  std::normal_distribution<double> n;
  std::vector<double> c(static_cast<std::size_t>(modes * modes));
  for (double& x : c) x = amplitude * n(rng) / static_cast<double>(modes);
  auto psi = [&](double x, double y) {
    double s = 0.0;
    for (int k = 1; k <= modes; ++k)
      for (int l = 1; l <= modes; ++l)
        s += c[static_cast<std::size_t>((k - 1) * modes + l - 1)] * std::sin(k * pi * x) * std::sin(l * pi * y);
    return std::sin(pi * x) * std::sin(pi * y) * s / (pi * pi);
  };
  return curl_of_stream(g, psi);
}

// Neumann Poisson solver for the discrete Leray projection: the potential
// phi with div grad phi = r, mean-zero. Reused for pressure recovery and for
// divergence cleaning.
class LerayProjector {
 public:
  explicit LerayProjector(const Grid& g) : grid_(g) {
    const int nx = g.nx(), ny = g.ny();
    const double cx = 1.0 / (g.dx() * g.dx());
    const double cy = 1.0 / (g.dy() * g.dy());
    auto id = [&](int i, int j) { return i * ny + j - 1; };  // cell (0,0) is pinned
    Triplets t;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        if (i == 0 && j == 0) continue;
        const int r = id(i, j);
        double diag = 0.0;
        auto link = [&](int i2, int j2, double k) {
          diag += k;
          if (!(i2 == 0 && j2 == 0)) t.emplace_back(r, id(i2, j2), -k);
        };
        if (i > 0) link(i - 1, j, cx);
        if (i + 1 < nx) link(i + 1, j, cx);
        if (j > 0) link(i, j - 1, cy);
        if (j + 1 < ny) link(i, j + 1, cy);
        t.emplace_back(r, r, diag);
      }
    SpMat N(g.cells() - 1, g.cells() - 1);
    N.setFromTriplets(t.begin(), t.end());
    solver_.compute(N);
    if (solver_.info() != Eigen::Success) throw SolverError("Leray projector: factorization failed");
  }

  const Grid& grid() const { return grid_; }

  // Solves div grad phi = rhs - mean(rhs) with phi mean-zero.
  ScalarField potential(const ScalarField& rhs) const {
    require_same_grid(grid_, rhs.grid());
    const double m = rhs.mean();
    Vec r(grid_.cells() - 1);
    auto v = rhs.values();
    for (int k = 1; k < grid_.cells(); ++k) r[k - 1] = -(v[k] - m);  // solver holds -div grad
    Vec x = solver_.solve(r);
    ScalarField phi(grid_);
    auto p = phi.values();
    p[0] = 0.0;
    for (int k = 1; k < grid_.cells(); ++k) p[k] = x[k - 1];
    phi.subtract_mean();
    return phi;
  }

  // Removes the gradient part of the interior faces of v; boundary data is
  // left untouched. Returns the potential that was removed.
  ScalarField project(VectorField& v) const {
    ScalarField phi = potential(divergence(v));
    VectorField gphi = gradient(phi);
    FaceDofs dofs(grid_);
    for (int c = 0; c < 2; ++c) {
      const ComponentShape& s = dofs.shape(c);
      for (int a = 1; a < s.na; ++a)
        for (int b = 0; b < s.nb; ++b) v.at(c, a, b) -= gphi.at(c, a, b);
    }
    return phi;
  }

  // Stokes operator S u = P(-lap u) for u in the discrete div-free, zero
  // trace subspace; also returns the pressure with -lap u + grad p = S u.
  std::pair<VectorField, ScalarField> stokes_operator(const VectorField& u) const {
    VectorField su = laplacian(u);
    su *= -1.0;
    ScalarField p = project(su);
    p *= -1.0;
    return {std::move(su), std::move(p)};
  }

 private:
  Grid grid_;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

}  // namespace mhd2d
