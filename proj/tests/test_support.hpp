#pragma once

#include <random>

#include "mhd2d/linalg.hpp"

namespace testing_support {

inline constexpr unsigned kSeed = 20240611u;

inline mhd2d::ScalarField random_scalar(const mhd2d::Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  mhd2d::ScalarField s(g);
  for (double& x : s.values()) x = n(rng);
  return s;
}

// Random values everywhere, boundary data included.
inline mhd2d::VectorField random_scalar_field_vector(const mhd2d::Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  mhd2d::VectorField v(g);
  for (int c = 0; c < 2; ++c) {
    for (double& x : v.comp(c)) x = n(rng);
    for (int side = 0; side < 2; ++side)
      for (double& x : v.wall(c, side)) x = n(rng);
  }
  return v;
}

inline mhd2d::VectorField random_zero_trace(const mhd2d::Grid& g, std::mt19937_64& rng) {
  auto v = random_scalar_field_vector(g, rng);
  v.clear_boundary();
  return v;
}

inline mhd2d::VectorField random_solenoidal(const mhd2d::Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  mhd2d::Vec psi(g.interior_nodes());
  for (int k = 0; k < psi.size(); ++k) psi[k] = n(rng);
  mhd2d::Vec faces = mhd2d::stream_curl_matrix(g) * psi;
  mhd2d::VectorField v(g);
  mhd2d::FaceDofs(g).scatter(faces, v);
  return v;
}

using mhd2d::smooth_solenoidal;

}  // namespace testing_support
