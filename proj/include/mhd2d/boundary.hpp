#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "mhd2d/io.hpp"
#include "mhd2d/linalg.hpp"

namespace mhd2d {

inline constexpr double kPerimeter = 4.0;

// Boundary nodes sit at the midpoints of the boundary cell edges and are
// numbered counter-clockwise in arc length from the corner (0,0). The
// normal boundary faces of a MAC field coincide with these nodes; the wall
// points carrying tangential values sit at the cell vertices in between.
class BoundaryLayout {
 public:
  explicit BoundaryLayout(const Grid& g) : grid_(g) {
    if (!g.square_cells()) throw ShapeError("boundary traces need nx == ny for uniform arc spacing");
  }

  const Grid& grid() const { return grid_; }
  int per_side() const { return grid_.nx(); }
  int count() const { return 4 * per_side(); }
  double spacing() const { return kPerimeter / count(); }
  double arc(int k) const { return (k + 0.5) * spacing(); }

  Vec2 position(int k) const {
    const int n = per_side();
    const double h = grid_.dx();
    const int side = k / n, r = k % n;
    switch (side) {
      case 0: return {(r + 0.5) * h, 0.0};
      case 1: return {1.0, (r + 0.5) * h};
      case 2: return {(n - 1 - r + 0.5) * h, 1.0};
      default: return {0.0, (n - 1 - r + 0.5) * h};
    }
  }

  // Node carrying the normal face of component c at a = 0 / na, row b.
  int normal_node(int c, int a, int b) const {
    const int n = per_side();
    if (c == 0) return a == 0 ? 3 * n + (n - 1 - b) : n + b;  // left / right edge, b = j
    return a == 0 ? b : 2 * n + (n - 1 - b);                  // bottom / top edge, b = i
  }

  // Wall point of component c on side 0/1 at index a, as a vertex index m:
  // the vertex at arc m * spacing, between nodes m-1 and m.
  int wall_vertex(int c, int side, int a) const {
    const int n = per_side();
    int m;
    if (c == 0)
      m = side == 0 ? a : 3 * n - a;  // bottom / top wall, a = i
    else
      m = side == 0 ? 4 * n - a : n + a;  // left / right wall, a = j
    return m % count();
  }

  bool operator==(const BoundaryLayout& o) const { return grid_ == o.grid_; }

 private:
  Grid grid_;
};

// One instant of boundary data: N rows of (h1, h2).
using TraceValues = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline TraceValues zero_trace(const BoundaryLayout& l) { return TraceValues::Zero(l.count(), 2); }

template <class F>
TraceValues sample_trace(const BoundaryLayout& l, F&& f) {
  TraceValues h(l.count(), 2);
  for (int k = 0; k < l.count(); ++k) {
    auto p = l.position(k);
    Vec2 v = f(p.x, p.y);
    h(k, 0) = v.x;
    h(k, 1) = v.y;
  }
  return h;
}

// Value of component c of the trace at vertex m. Between two nodes of the
// same edge this is their average. At a corner the nodes lie on different
// edges, so each edge is extrapolated linearly to the corner and the two
// estimates are averaged; corner values only enter norm quadratures, never
// the solution stencils.
inline double vertex_value(const BoundaryLayout& l, const TraceValues& h, int m, int c) {
  const int n = l.count();
  auto at = [&](int k) { return h(((k % n) + n) % n, c); };
  if (m % l.per_side() != 0) return 0.5 * (at(m - 1) + at(m));
  return 0.25 * ((3 * at(m) - at(m + 1)) + (3 * at(m - 1) - at(m - 2)));
}

// Writes the trace into the boundary data of v: normal boundary faces from
// the nodes, wall values from the vertex averages. Interior faces are kept.
inline void apply_trace(VectorField& v, const BoundaryLayout& l, const TraceValues& h) {
  require_same_grid(v.grid(), l.grid());
  for (int c = 0; c < 2; ++c) {
    auto s = v.shape(c);
    for (int b = 0; b < s.nb; ++b) {
      v.at(c, 0, b) = h(l.normal_node(c, 0, b), c);
      v.at(c, s.na, b) = h(l.normal_node(c, s.na, b), c);
    }
    for (int side = 0; side < 2; ++side) {
      auto w = v.wall(c, side);
      for (int a = 0; a <= s.na; ++a) w[a] = vertex_value(l, h, l.wall_vertex(c, side, a), c);
    }
  }
}

// L2(Gamma) distance between the boundary data of v and the trace, measured
// on the points where v stores boundary values. Normal components are
// weighted by the node spacing, tangential ones by the trapezoid rule along
// each edge; for constant data this gives |c - c'| * sqrt(perimeter).
inline double trace_residual(const VectorField& v, const BoundaryLayout& l, const TraceValues& h) {
  require_same_grid(v.grid(), l.grid());
  const double ds = l.spacing();
  double s2 = 0.0;
  for (int c = 0; c < 2; ++c) {
    auto s = v.shape(c);
    for (int b = 0; b < s.nb; ++b)
      for (int a : {0, s.na}) {
        const double d = v.at(c, a, b) - h(l.normal_node(c, a, b), c);
        s2 += d * d * ds;
      }
    for (int side = 0; side < 2; ++side) {
      auto w = v.wall(c, side);
      for (int a = 0; a <= s.na; ++a) {
        const double d = w[a] - vertex_value(l, h, l.wall_vertex(c, side, a), c);
        s2 += d * d * ds * s.weight(a);
      }
    }
  }
  return std::sqrt(s2);
}

inline double trace_l2(const BoundaryLayout& l, const TraceValues& h) {
  return std::sqrt(l.spacing() * h.squaredNorm());
}

// ---- fractional boundary norms ---------------------------------------------

struct FractionalNormSpec {
  double s = 0.5;
  int truncation = -1;  // highest |k| kept; negative means all resolvable modes
};

inline bool supported_exponent(double s) { return s == -0.5 || s == 0.0 || s == 0.5 || s == 1.5; }

// |h|^2_{H^s(Gamma)} = P * sum_{|k| <= K} (1 + kappa_k^2)^s |hhat_k|^2 with
// hhat_k = (1/N) sum_j h_j e^{-2 pi i k j / N} and kappa_k = 2 pi k / P, summed
// over both components. With s = 0 and all modes this is exactly the node
// quadrature of |h|^2 over Gamma.
inline double hs_norm_sq(const TraceValues& h, const FractionalNormSpec& spec) {
  if (!supported_exponent(spec.s))
    throw InputError("unsupported Sobolev exponent " + format_double(spec.s) + " (allowed: -1/2, 0, 1/2, 3/2)");
  const int n = static_cast<int>(h.rows());
  if (spec.truncation > n / 2) throw InputError("Fourier truncation exceeds half the boundary sample count");
  const int kmax = spec.truncation < 0 ? n / 2 : spec.truncation;
  Eigen::FFT<double> fft;
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> in(h.col(c).data(), h.col(c).data() + n);
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    for (int k = 0; k < n; ++k) {
      const int wave = k <= n / 2 ? k : k - n;  // Nyquist counted once, as +n/2
      if (std::abs(wave) > kmax) continue;
      const double kappa = 2.0 * std::numbers::pi * wave / kPerimeter;
      total += std::pow(1.0 + kappa * kappa, spec.s) * std::norm(out[k] / static_cast<double>(n));
    }
  }
  return kPerimeter * total;
}

// ---- time-sampled traces -----------------------------------------------------

// Boundary data sampled at increasing instants. Between instants the trace
// is linear in time; a single instant means data constant in time.
class BoundaryTrace {
 public:
  BoundaryTrace(BoundaryLayout layout, std::vector<double> times, std::vector<TraceValues> values)
      : layout_(std::move(layout)), times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size()) throw InputError("trace needs matching, non-empty samples");
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (values_[k].rows() != layout_.count())
        throw ShapeError("trace instant has " + std::to_string(values_[k].rows()) + " samples, expected " +
                         std::to_string(layout_.count()));
      if (!values_[k].allFinite()) throw InputError("trace contains non-finite values");
      if (k > 0 && !(times_[k] > times_[k - 1])) throw InputError("trace instants must be strictly increasing");
    }
  }

  static BoundaryTrace zero(const Grid& g) {
    BoundaryLayout l(g);
    return BoundaryTrace(l, {0.0}, {zero_trace(l)});
  }
  static BoundaryTrace constant(const BoundaryLayout& l, TraceValues h) {
    return BoundaryTrace(l, {0.0}, {std::move(h)});
  }

  const BoundaryLayout& layout() const { return layout_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t instants() const { return times_.size(); }
  const TraceValues& values(std::size_t k) const { return values_[k]; }

  TraceValues at(double t) const {
    if (times_.size() == 1) return values_[0];
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin());
    const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
    if (w == 0.0) return values_[k - 1];
    return (1.0 - w) * values_[k - 1] + w * values_[k];
  }

  // Finite-difference time derivative at instant k: centred inside, one
  // sided at the ends.
  TraceValues time_derivative(std::size_t k) const {
    const std::size_t n = times_.size();
    if (n == 1) return TraceValues::Zero(layout_.count(), 2);
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
    return (values_[hi] - values_[lo]) / (times_[hi] - times_[lo]);
  }

  TraceValues time_derivative_at(double t) const {
    if (times_.size() == 1) return TraceValues::Zero(layout_.count(), 2);
    return time_derivative(nearest_instant(t));
  }

  std::size_t nearest_instant(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return times_.size() - 1;
    std::size_t k = static_cast<std::size_t>(it - times_.begin());
    if (k > 0 && std::abs(times_[k - 1] - t) < std::abs(times_[k] - t)) --k;
    return k;
  }

  bool is_zero() const {
    for (const auto& v : values_)
      if (!v.isZero(0.0)) return false;
    return true;
  }

 private:
  BoundaryLayout layout_;
  std::vector<double> times_;
  std::vector<TraceValues> values_;
};

// Norm of the trace at an instant that must be one of the sampled times.
inline double hs_norm(const BoundaryTrace& trace, double t, const FractionalNormSpec& spec) {
  const std::size_t k = trace.nearest_instant(t);
  if (trace.instants() > 1 && std::abs(trace.times()[k] - t) > 1e-12 * (1.0 + std::abs(t)))
    throw InputError("hs_norm: t = " + format_double(t) + " is not a sampled instant");
  return std::sqrt(hs_norm_sq(trace.values(k), spec));
}

// ---- synthesized traces -------------------------------------------------------

enum class EnvelopeKind { constant, sinusoidal, ramp };

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::constant;
  double rate = 0.0;  // frequency for sinusoidal, growth rate for ramp

  double operator()(double t) const {
    switch (kind) {
      case EnvelopeKind::sinusoidal: return std::sin(2.0 * std::numbers::pi * rate * t);
      case EnvelopeKind::ramp: return 1.0 - std::exp(-rate * t);
      default: return 1.0;
    }
  }
  bool operator==(const Envelope&) const = default;
};

// amplitude * envelope(t) * cos(2 pi l s / P) in one Cartesian component.
// Even wavenumbers carry zero net flux through every edge, which keeps the
// data compatible with a divergence-free field.
struct FourierMode {
  double amplitude = 0.0;
  int wavenumber = 0;
  int component = 0;
  Envelope envelope;
  bool operator==(const FourierMode&) const = default;
};

class BoundaryModel {
 public:
  BoundaryModel() = default;
  explicit BoundaryModel(std::vector<FourierMode> modes) : modes_(std::move(modes)) {
    for (const auto& m : modes_) {
      if (m.wavenumber < 0 || m.wavenumber % 2 != 0)
        throw InputError("boundary mode wavenumber must be even and non-negative");
      if (m.component != 0 && m.component != 1) throw InputError("boundary mode component must be 0 or 1");
    }
  }
  const std::vector<FourierMode>& modes() const { return modes_; }
  bool empty() const { return modes_.empty(); }

  TraceValues evaluate(const BoundaryLayout& l, double t) const {
    TraceValues h = zero_trace(l);
    for (const auto& m : modes_) {
      const double e = m.amplitude * m.envelope(t);
      if (e == 0.0) continue;
      for (int k = 0; k < l.count(); ++k)
        h(k, m.component) += e * std::cos(2.0 * std::numbers::pi * m.wavenumber * l.arc(k) / kPerimeter);
    }
    return h;
  }

  BoundaryTrace sample(const BoundaryLayout& l, const std::vector<double>& times) const {
    std::vector<TraceValues> v;
    v.reserve(times.size());
    for (double t : times) v.push_back(evaluate(l, t));
    return BoundaryTrace(l, times, std::move(v));
  }

  BoundaryModel scaled(double f) const {
    auto m = modes_;
    for (auto& x : m) x.amplitude *= f;
    return BoundaryModel(std::move(m));
  }

 private:
  std::vector<FourierMode> modes_;
};

inline std::vector<double> uniform_times(double dt, int steps) {
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[static_cast<std::size_t>(k)] = k * dt;
  return t;
}

// ---- CSV ingestion -------------------------------------------------------------

// Columns time, arclength, h1, h2, sorted by time and then arc length; each
// instant lists every boundary node. Errors name the offending data row
// (1-based, header excluded).
inline BoundaryTrace parse_trace_csv(const BoundaryLayout& l, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("boundary CSV is empty");
  std::vector<double> times;
  std::vector<TraceValues> values;
  int row = 0, node = 0;
  double prev_t = 0.0, prev_s = 0.0;
  auto fail = [&](const std::string& why) {
    throw InputError("boundary CSV row " + std::to_string(row) + ": " + why);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    std::array<double, 4> f{};
    std::istringstream ls(line);
    std::string cell;
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= 4) fail("expected 4 columns");
      try {
        std::size_t used = 0;
        f[col] = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) fail("malformed number '" + cell + "'");
      } catch (const std::logic_error&) {
        fail("malformed number '" + cell + "'");
      }
      ++col;
    }
    if (col != 4) fail("expected 4 columns");
    const double t = f[0], s = f[1];
    if (!std::isfinite(t) || !std::isfinite(s) || !std::isfinite(f[2]) || !std::isfinite(f[3])) fail("non-finite value");
    const bool new_instant = values.empty() || t != prev_t;
    if (new_instant) {
      if (!values.empty() && t < prev_t) fail("time not sorted");
      if (!values.empty() && node != l.count()) fail("previous instant has " + std::to_string(node) + " nodes");
      times.push_back(t);
      values.push_back(zero_trace(l));
      node = 0;
    } else if (!(s > prev_s)) {
      fail("arc length not sorted");
    }
    if (node >= l.count()) fail("too many nodes for this instant");
    if (std::abs(s - l.arc(node)) > 1e-9) fail("arc length does not match boundary node " + std::to_string(node));
    values.back()(node, 0) = f[2];
    values.back()(node, 1) = f[3];
    ++node;
    prev_t = t;
    prev_s = s;
  }
  if (values.empty()) throw InputError("boundary CSV has no data rows");
  if (node != l.count()) throw InputError("boundary CSV: last instant has " + std::to_string(node) + " nodes");
  return BoundaryTrace(l, std::move(times), std::move(values));
}

inline std::string trace_to_csv(const BoundaryTrace& tr) {
  std::string out = "time,arclength,h1,h2\n";
  const auto& l = tr.layout();
  for (std::size_t k = 0; k < tr.instants(); ++k)
    for (int j = 0; j < l.count(); ++j) {
      out += format_double(tr.times()[k]) + ',' + format_double(l.arc(j)) + ',' +
             format_double(tr.values(k)(j, 0)) + ',' + format_double(tr.values(k)(j, 1)) + '\n';
    }
  return out;
}

}  // namespace mhd2d
