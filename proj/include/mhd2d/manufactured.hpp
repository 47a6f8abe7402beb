#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "mhd2d/dynamics.hpp"

namespace mhd2d {

// Manufactured solution with time factor a(t):
//   u = a(t) curl(sin^2(pi x) sin^2(pi y)),  b = a(t) (sin(pi y), sin(pi x)),  p = 0,
// and the body forces that make it exact. a == 1 gives a steady state.
struct Manufactured {
  double Re = 1.0, Rm = 1.0, S = 1.0;
  bool time_dependent = false;

  double amplitude(double t) const {
    return time_dependent ? 1.0 + 0.5 * std::sin(2 * std::numbers::pi * t) : 1.0;
  }
  double amplitude_rate(double t) const {
    return time_dependent ? std::numbers::pi * std::cos(2 * std::numbers::pi * t) : 0.0;
  }

  static double stream(double x, double y) {
    const double sx = std::sin(std::numbers::pi * x), sy = std::sin(std::numbers::pi * y);
    return sx * sx * sy * sy;
  }

  // Spatial profiles and their derivatives.
  struct Profile {
    Vec2 u, b;            // U, B
    Vec2 lap_u, lap_b;    // Laplacians
    Vec2 u_grad_u, b_grad_b, u_grad_b, b_grad_u;
  };

  static Profile profile(double x, double y) {
    using std::numbers::pi;
    const double sx = std::sin(pi * x), sy = std::sin(pi * y), cx = std::cos(pi * x), cy = std::cos(pi * y);
    const double s2x = std::sin(2 * pi * x), s2y = std::sin(2 * pi * y);
    const double c2x = std::cos(2 * pi * x), c2y = std::cos(2 * pi * y);
    const double pi2 = pi * pi, pi3 = pi2 * pi;
    Profile p;
    p.u = {pi * sx * sx * s2y, -pi * sy * sy * s2x};
    const double u1x = pi2 * s2x * s2y, u1y = 2 * pi2 * sx * sx * c2y;
    const double u2x = -2 * pi2 * sy * sy * c2x, u2y = -pi2 * s2x * s2y;
    p.lap_u = {2 * pi3 * s2y * (1 - 4 * sx * sx), -2 * pi3 * s2x * (1 - 4 * sy * sy)};
    p.b = {sy, sx};
    const double b1y = pi * cy, b2x = pi * cx;
    p.lap_b = {-pi2 * sy, -pi2 * sx};
    p.u_grad_u = {p.u.x * u1x + p.u.y * u1y, p.u.x * u2x + p.u.y * u2y};
    p.b_grad_b = {p.b.y * b1y, p.b.x * b2x};
    p.u_grad_b = {p.u.y * b1y, p.u.x * b2x};
    p.b_grad_u = {p.b.x * u1x + p.b.y * u1y, p.b.x * u2x + p.b.y * u2y};
    return p;
  }

  Vec2 force_u(double x, double y, double t) const {
    const auto p = profile(x, y);
    const double a = amplitude(t), da = amplitude_rate(t);
    return {da * p.u.x - a / Re * p.lap_u.x + a * a * (p.u_grad_u.x - S * p.b_grad_b.x),
            da * p.u.y - a / Re * p.lap_u.y + a * a * (p.u_grad_u.y - S * p.b_grad_b.y)};
  }

  Vec2 force_b(double x, double y, double t) const {
    const auto p = profile(x, y);
    const double a = amplitude(t), da = amplitude_rate(t);
    return {da * p.b.x - a / Rm * p.lap_b.x + a * a * (p.u_grad_b.x - p.b_grad_u.x),
            da * p.b.y - a / Rm * p.lap_b.y + a * a * (p.u_grad_b.y - p.b_grad_u.y)};
  }

  Forcing forcing() const {
    return {[m = *this](double x, double y, double t) { return m.force_u(x, y, t); },
            [m = *this](double x, double y, double t) { return m.force_b(x, y, t); }};
  }

  // Velocity as the discrete curl of the sampled stream function, so it is
  // exactly divergence free on the grid.
  VectorField velocity(const Grid& g, double t) const {
    VectorField u = curl_of_stream(g, stream);
    u *= amplitude(t);
    return u;
  }

  VectorField magnetic(const Grid& g, double t) const {
    const double a = amplitude(t);
    return VectorField::sample(g, [&](double x, double y) { return Vec2{a * std::sin(std::numbers::pi * y), a * std::sin(std::numbers::pi * x)}; });
  }

  BoundaryTrace trace(const BoundaryLayout& l, const std::vector<double>& times) const {
    std::vector<TraceValues> values;
    const TraceValues shape = sample_trace(l, [](double x, double y) {
      return Vec2{std::sin(std::numbers::pi * y), std::sin(std::numbers::pi * x)};
    });
    for (double t : times) values.push_back(amplitude(t) * shape);
    return BoundaryTrace(l, times, std::move(values));
  }
};

}  // namespace mhd2d
