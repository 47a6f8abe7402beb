#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mhd2d/io.hpp"
#include "mhd2d/linalg.hpp"

namespace mhd2d {

enum class BasisKind : std::uint8_t { stokes = 1, dirichlet_laplacian = 2 };

inline const char* to_string(BasisKind k) { return k == BasisKind::stokes ? "stokes" : "dirichlet_laplacian"; }

enum class EigenMethod { automatic, dense, iterative };

// Largest grid dimension handled by the dense eigensolver in automatic mode.
inline constexpr int kDenseEigenLimit = 48;

// Ordered eigenpairs of a discrete operator on zero-trace fields. Modes are
// stored as columns over the interior faces and are orthonormal in the face
// inner product.
class SpectralBasis {
 public:
  SpectralBasis(BasisKind kind, const Grid& g, Vec values, Mat vectors)
      : kind_(kind), grid_(g), values_(std::move(values)), vectors_(std::move(vectors)) {
    if (vectors_.cols() != values_.size() || vectors_.rows() != FaceDofs(g).count())
      throw ShapeError("SpectralBasis: vectors do not match grid or eigenvalue count");
  }

  BasisKind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }
  int count() const { return static_cast<int>(values_.size()); }
  double value(int i) const { return values_[i]; }
  const Vec& values() const { return values_; }
  const Mat& vectors() const { return vectors_; }

  VectorField mode(int i) const {
    VectorField v(grid_);
    FaceDofs(grid_).scatter(vectors_.col(i), v);
    return v;
  }

  bool operator==(const SpectralBasis& o) const {
    return kind_ == o.kind_ && grid_ == o.grid_ && values_.size() == o.values_.size() &&
           vectors_.rows() == o.vectors_.rows() && values_ == o.values_ && vectors_ == o.vectors_;
  }

 private:
  BasisKind kind_;
  Grid grid_;
  Vec values_;
  Mat vectors_;
};

namespace detail {

// First entry of significant size made positive.
inline void fix_sign(Eigen::Ref<Vec> v) {
  const double tol = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (std::abs(v[k]) > tol) {
      if (v[k] < 0) v = -v;
      return;
    }
}

inline void normalize_columns(Mat& V, double weight) {
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    V.col(j) /= std::sqrt(weight * V.col(j).squaredNorm());
    fix_sign(V.col(j));
  }
}

// Homogeneous vector Laplacian on interior faces (boundary data zero).
inline SpMat homogeneous_laplacian(const Grid& g) {
  FaceDofs dofs(g);
  return assemble_laplacian(dofs, VectorField(g)).A;
}

}  // namespace detail

// Eigenpairs of -lap on zero-trace fields. The operator is a Kronecker sum of
// one-dimensional second differences per component, so eigenvectors are
// products of discrete sines and are built directly.
inline SpectralBasis build_laplacian_basis(const Grid& g, int m) {
  FaceDofs dofs(g);
  if (m < 0 || m > dofs.count())
    throw CapacityError("build_laplacian_basis: requested " + std::to_string(m) + " modes, capacity " +
                        std::to_string(dofs.count()));
  using std::numbers::pi;
  struct Entry {
    double value;
    int c, k, l;
  };
  std::vector<Entry> all;
  all.reserve(static_cast<std::size_t>(dofs.count()));
  for (int c = 0; c < 2; ++c) {
    const auto& s = dofs.shape(c);
    for (int k = 1; k < s.na; ++k)
      for (int l = 1; l <= s.nb; ++l) {
        const double sk = std::sin(k * pi / (2.0 * s.na));
        const double sl = std::sin(l * pi / (2.0 * s.nb));
        all.push_back({4.0 / (s.dn * s.dn) * sk * sk + 4.0 / (s.dc * s.dc) * sl * sl, c, k, l});
      }
  }
  std::sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.value, x.c, x.k, x.l) < std::tie(y.value, y.c, y.k, y.l);
  });
  Vec values(m);
  Mat V = Mat::Zero(dofs.count(), m);
  for (int j = 0; j < m; ++j) {
    const Entry& e = all[static_cast<std::size_t>(j)];
    const auto& s = dofs.shape(e.c);
    values[j] = e.value;
    for (int a = 1; a < s.na; ++a)
      for (int b = 0; b < s.nb; ++b)
        V(dofs.index(e.c, a, b), j) = std::sin(e.k * pi * a / s.na) * std::sin(e.l * pi * (b + 0.5) / s.nb);
  }
  detail::normalize_columns(V, g.cell_area());
  return SpectralBasis(BasisKind::dirichlet_laplacian, g, std::move(values), std::move(V));
}

namespace detail {

struct StokesPencil {
  SpMat C;  // stream function -> faces
  SpMat K;  // C^T (-lap) C
  SpMat M;  // C^T C
};

inline StokesPencil stokes_pencil(const Grid& g) {
  StokesPencil p;
  p.C = stream_curl_matrix(g);
  SpMat L = homogeneous_laplacian(g);
  SpMat Ct = p.C.transpose();
  p.K = SpMat(Ct * (-L) * p.C) * g.cell_area();
  p.M = SpMat(Ct * p.C) * g.cell_area();
  return p;
}

inline std::pair<Vec, Mat> dense_pencil(const StokesPencil& p, int n) {
  Mat K(p.K), M(p.M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(K, M);
  if (es.info() != Eigen::Success) throw SolverError("Stokes basis: dense generalized eigensolver failed");
  return {es.eigenvalues().head(n), es.eigenvectors().leftCols(n)};
}

// Shift-invert block subspace iteration with Rayleigh-Ritz on the pencil
// (K, M), shift 0. Converges at rate lambda_i / lambda_{p+1} per sweep.
inline std::pair<Vec, Mat> iterative_pencil(const StokesPencil& p, int n, double tol = 1e-9,
                                            int max_sweeps = 2000) {
  const int N = static_cast<int>(p.K.rows());
  const int block = std::min(N, std::max(2 * n + 8, n + 16));
  Eigen::SimplicialLDLT<SpMat> solver(p.K);
  if (solver.info() != Eigen::Success) throw SolverError("Stokes basis: factorization of K failed");

  std::mt19937_64 rng(0x5eedu);
  std::normal_distribution<double> nd;
  Mat X(N, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < N; ++i) X(i, j) = nd(rng);

  auto m_orthonormalize = [&](Mat& Y) {
    for (int pass = 0; pass < 2; ++pass) {
      Mat G = Y.transpose() * (p.M * Y);
      Eigen::LLT<Mat> llt(G);
      if (llt.info() != Eigen::Success) throw SolverError("Stokes basis: subspace lost rank");
      Mat Linv = llt.matrixL().solve(Mat::Identity(Y.cols(), Y.cols()));
      Y = Y * Linv.transpose();
    }
  };

  Vec theta;
  Vec residuals;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Mat Y = solver.solve(p.M * X);
    m_orthonormalize(Y);
    Mat Kr = Y.transpose() * (p.K * Y);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Kr + Kr.transpose()));
    X = Y * es.eigenvectors();
    theta = es.eigenvalues();
    residuals.resize(n);
    for (int j = 0; j < n; ++j) {
      Vec r = p.K * X.col(j) - theta[j] * (p.M * X.col(j));
      residuals[j] = r.norm() / (theta[j] * (p.M * X.col(j)).norm());
    }
    if (residuals.maxCoeff() < tol) return {theta.head(n), X.leftCols(n)};
  }
  std::ostringstream os;
  os << "Stokes basis: subspace iteration did not converge; relative residuals:";
  for (int j = 0; j < residuals.size(); ++j) os << ' ' << residuals[j];
  throw SolverError(os.str());
}

}  // namespace detail

// Eigenpairs of the discrete Stokes operator. Modes are sought as discrete
// curls of interior-node stream functions, which spans the divergence-free
// zero-trace subspace exactly; the projected Laplacian becomes the pencil
// (C^T(-lap)C, C^T C).
inline SpectralBasis build_stokes_basis(const Grid& g, int n, EigenMethod method = EigenMethod::automatic) {
  const int dim = g.interior_nodes();
  if (n < 0 || n > dim)
    throw CapacityError("build_stokes_basis: requested " + std::to_string(n) + " modes, divergence-free dimension " +
                        std::to_string(dim));
  FaceDofs dofs(g);
  if (n == 0) return SpectralBasis(BasisKind::stokes, g, Vec(0), Mat(dofs.count(), 0));
  auto pencil = detail::stokes_pencil(g);
  const bool dense = method == EigenMethod::dense ||
                     (method == EigenMethod::automatic && std::max(g.nx(), g.ny()) <= kDenseEigenLimit) ||
                     n > dim / 2;
  auto [values, psi] = dense ? detail::dense_pencil(pencil, n) : detail::iterative_pencil(pencil, n);
  Mat V = pencil.C * psi;
  detail::normalize_columns(V, g.cell_area());
  return SpectralBasis(BasisKind::stokes, g, std::move(values), std::move(V));
}

inline SpectralBasis build_basis(BasisKind kind, const Grid& g, int count) {
  return kind == BasisKind::stokes ? build_stokes_basis(g, count) : build_laplacian_basis(g, count);
}

// || A phi - value phi || for each mode, where A is -lap (laplacian kind)
// or the projected -lap (stokes kind).
inline Vec eigen_residuals(const SpectralBasis& basis) {
  Vec r(basis.count());
  std::optional<LerayProjector> leray;
  if (basis.kind() == BasisKind::stokes) leray.emplace(basis.grid());
  for (int i = 0; i < basis.count(); ++i) {
    VectorField phi = basis.mode(i);
    VectorField a = laplacian(phi);
    a *= -1.0;
    if (leray) leray->project(a);
    a.axpy(-basis.value(i), phi);
    r[i] = norm(a);
  }
  return r;
}

// Pressure p_i of a Stokes mode: -lap xi + grad p = lambda xi, mean-zero.
inline ScalarField mode_pressure(const SpectralBasis& basis, int i, const LerayProjector& leray) {
  require(basis.kind() == BasisKind::stokes, "mode_pressure needs a Stokes basis");
  return leray.stokes_operator(basis.mode(i)).second;
}

struct Projection {
  Vec coefficients;
  VectorField field;
};

inline Projection project(const SpectralBasis& basis, const VectorField& f, int k) {
  require_same_grid(basis.grid(), f.grid());
  if (k < 0 || k > basis.count()) throw CapacityError("project: k exceeds basis size");
  FaceDofs dofs(basis.grid());
  Vec x;
  dofs.gather(f, x);
  Vec coef = basis.grid().cell_area() * (basis.vectors().leftCols(k).transpose() * x);
  Vec rec = basis.vectors().leftCols(k) * coef;
  VectorField out(basis.grid());
  dofs.scatter(rec, out);
  return {std::move(coef), std::move(out)};
}

struct PoincareConstants {
  double c_u, c_b, c_p;
};

inline PoincareConstants poincare_constants(const SpectralBasis& stokes, const SpectralBasis& lap) {
  require(stokes.count() > 0 && lap.count() > 0, "poincare_constants: empty basis");
  require(stokes.kind() == BasisKind::stokes && lap.kind() == BasisKind::dirichlet_laplacian,
          "poincare_constants: basis kinds swapped");
  const double cu = stokes.value(0), cb = lap.value(0);
  return {cu, cb, 0.5 * std::min(cu, cb)};
}

struct InequalityCheck {
  double c0 = 0.0;                 // smallest constant making the bound hold on all samples
  double max_ratio = 0.0;          // max of |lap u1|^2 / (lambda_{n+1} |grad u1|^2)
  double gradient_identity_error = 0.0;  // relative, |grad u1|^2 vs sum g_i^2 lambda_i
};

// Samples coefficient vectors on modes 1..n (unit vectors plus `samples`
// Gaussian draws) and measures the constant of the inverse inequality
// |lap u1|^2 <= (c0 + 1) lambda_{n+1} |grad u1|^2.
inline InequalityCheck basis_inequality_check(const SpectralBasis& stokes, int n, int samples, std::uint64_t seed) {
  require(stokes.kind() == BasisKind::stokes, "basis_inequality_check needs a Stokes basis");
  if (n < 0 || n >= stokes.count()) throw CapacityError("basis_inequality_check: need n < basis size");
  InequalityCheck out;
  if (n == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  FaceDofs dofs(stokes.grid());
  const double next = stokes.value(n);
  auto evaluate = [&](const Vec& g) {
    if (g.squaredNorm() == 0.0) return;
    VectorField u(stokes.grid());
    dofs.scatter(Vec(stokes.vectors().leftCols(n) * g), u);
    const double grad = grad_norm_sq(u);
    double spectral = 0.0;
    for (int i = 0; i < n; ++i) spectral += g[i] * g[i] * stokes.value(i);
    out.gradient_identity_error = std::max(out.gradient_identity_error, std::abs(grad - spectral) / spectral);
    const double ratio = norm_sq(laplacian(u)) / (next * grad);
    out.max_ratio = std::max(out.max_ratio, ratio);
  };
  for (int i = 0; i < n; ++i) evaluate(Vec::Unit(n, i));
  for (int s = 0; s < samples; ++s) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = nd(rng);
    evaluate(g);
  }
  out.c0 = std::max(0.0, out.max_ratio - 1.0);
  return out;
}

// ---- basis cache ------------------------------------------------------------

inline constexpr std::string_view kBasisMagic = "MHDBASIS1";

inline std::string encode_basis(const SpectralBasis& b) {
  BinaryWriter w;
  w.bytes(kBasisMagic);
  w.u8(static_cast<std::uint8_t>(b.kind()));
  w.i64(b.grid().nx());
  w.i64(b.grid().ny());
  w.i64(b.count());
  w.i64(b.vectors().rows());
  for (double v : b.values()) w.f64(v);
  for (Eigen::Index j = 0; j < b.vectors().cols(); ++j)
    for (Eigen::Index i = 0; i < b.vectors().rows(); ++i) w.f64(b.vectors()(i, j));
  return w.data();
}

// A cache file is only accepted when kind, grid and mode count all match the
// request; anything else means rebuild.
inline SpectralBasis decode_basis(std::string_view data, BasisKind kind, const Grid& g, int count) {
  BinaryReader r(data);
  if (r.bytes(kBasisMagic.size()) != kBasisMagic) throw InputError("not a basis cache file");
  const auto k = r.u8();
  const auto nx = r.i64(), ny = r.i64(), n = r.i64(), rows = r.i64();
  if (k != static_cast<std::uint8_t>(kind) || nx != g.nx() || ny != g.ny() || n != count)
    throw InputError("basis cache key does not match (kind, nx, ny, count)");
  if (rows != FaceDofs(g).count()) throw InputError("basis cache has the wrong vector length");
  Vec values(n);
  for (auto& v : values) v = r.f64();
  Mat vectors(rows, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) vectors(i, j) = r.f64();
  if (!r.at_end()) throw InputError("basis cache has trailing bytes");
  return SpectralBasis(kind, g, std::move(values), std::move(vectors));
}

inline std::string basis_cache_name(BasisKind kind, const Grid& g, int count) {
  return std::string(to_string(kind)) + "_" + std::to_string(g.nx()) + "x" + std::to_string(g.ny()) + "_" +
         std::to_string(count) + ".basis";
}


}  // namespace mhd2d
