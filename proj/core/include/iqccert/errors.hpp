#pragma once

#include <stdexcept>
#include <string>

namespace iqccert {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical kernel failure (eigensolver non-convergence, factorization breakdown).
class KernelError : public Error {
 public:
  using Error::Error;
};

// Input fails a structural precondition (not doubly stochastic, disconnected graph, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Parameter outside its mathematical domain (sigma outside (-1,1), eta <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent dimensions while assembling an LMI.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

// Step-size search could not complete (indeterminate solve, no feasible step, ...).
class StepSearchError : public Error {
 public:
  using Error::Error;
};

// Simulation aborted (divergent state, inner minimization failure, ...).
class SimulationError : public Error {
 public:
  using Error::Error;
};

// File parsing / serialization problems.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace iqccert
