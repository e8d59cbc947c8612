#pragma once

#include <stdexcept>
#include <string>

namespace aoc {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: potential parameters, grid settings, config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain where a representation is valid.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point closer to the Dirichlet spectrum than the kernels tolerate.
class NearSpectrumError : public Error {
 public:
  using Error::Error;
};

/// ODE integration or root bracketing broke down.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A Nystrom system (1 - B J) is singular to working precision.
class NotInvertibleError : public Error {
 public:
  using Error::Error;
};

/// An energy sits on an eigenvalue, so counting below it is ill-defined.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

}  // namespace aoc
