#pragma once

#include <stdexcept>
#include <string>

namespace mhd2d {

// Mismatched grids or array sizes.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A documented precondition was violated by the caller.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Requested more modes or samples than the discretization can hold.
struct CapacityError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Linear solver, eigensolver or nonlinear iteration failed.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input data rejected (compatibility, ingestion, unsupported options).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace mhd2d
