#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mhd2d/dynamics.hpp"

namespace mhd2d {

enum class InitialPreset { zero, lift, smooth };

inline InitialPreset parse_initial_preset(std::string_view s) {
  if (s == "zero") return InitialPreset::zero;
  if (s == "lift") return InitialPreset::lift;
  if (s == "smooth") return InitialPreset::smooth;
  throw InputError("unknown initial preset '" + std::string(s) + "' (expected zero, lift or smooth)");
}

inline const char* to_string(InitialPreset p) {
  switch (p) {
    case InitialPreset::zero: return "zero";
    case InitialPreset::lift: return "lift";
    default: return "smooth";
  }
}

// Named boundary data plus a default initial preset.
struct Scenario {
  std::string id;
  BoundaryModel boundary;
  InitialPreset initial = InitialPreset::smooth;
};

inline const std::vector<Scenario>& scenarios() {
  using E = EnvelopeKind;
  static const std::vector<Scenario> all{
      {"zero", BoundaryModel{}, InitialPreset::zero},
      {"decay", BoundaryModel{}, InitialPreset::smooth},
      {"ramp_reference",
       BoundaryModel({{1.0, 2, 0, {E::ramp, 20.0}}, {0.5, 6, 1, {E::ramp, 20.0}}}),
       InitialPreset::smooth},
      {"oscillatory", BoundaryModel({{1.0, 2, 1, {E::sinusoidal, 2.0}}}), InitialPreset::smooth},
      {"constant", BoundaryModel({{0.5, 2, 0, {E::constant, 0.0}}}), InitialPreset::smooth},
      {"mixed",
       BoundaryModel({{0.8, 2, 0, {E::sinusoidal, 1.0}}, {0.4, 4, 1, {E::ramp, 10.0}}, {0.3, 0, 0, {E::constant, 0.0}}}),
       InitialPreset::smooth},
      {"small_periodic", BoundaryModel({{0.05, 2, 0, {E::sinusoidal, 1.0}}}), InitialPreset::smooth},
  };
  return all;
}

inline const Scenario& find_scenario(std::string_view id) {
  for (const auto& s : scenarios())
    if (s.id == id) return s;
  std::string known;
  for (const auto& s : scenarios()) known += (known.empty() ? "" : ", ") + s.id;
  throw InputError("unknown scenario '" + std::string(id) + "' (known: " + known + ")");
}

// Harmonic extension of the t=0 trace, made discretely divergence free in
// the interior. Compatible initial magnetic data for any trace.
inline VectorField compatible_lift(const BoundaryTrace& trace) {
  VectorField b = harmonic_extend(trace, 0.0);
  LerayProjector(trace.layout().grid()).project(b);
  return b;
}

// Initial (u0, b0) for a preset. "smooth" adds seeded random solenoidal
// fields of the given amplitude to the lift.
inline std::pair<VectorField, VectorField> initial_fields(InitialPreset preset, const BoundaryTrace& trace,
                                                          std::uint64_t seed, double amplitude = 1.0) {
  const Grid& g = trace.layout().grid();
  if (preset == InitialPreset::zero) return {VectorField(g), VectorField(g)};
  VectorField b = compatible_lift(trace);
  VectorField u(g);
  if (preset == InitialPreset::smooth) {
    std::mt19937_64 rng(seed);
    u = smooth_solenoidal(g, rng, amplitude);
    b += smooth_solenoidal(g, rng, amplitude);
  }
  return {std::move(u), std::move(b)};
}

}  // namespace mhd2d
