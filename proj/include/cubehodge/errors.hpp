#pragma once

#include <stdexcept>
#include <string>

namespace cubehodge {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in cubehodge" can catch this one type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Grid extents or spacing that cannot describe a Cartesian complex.
class InvalidGeometry : public Error {
public:
  using Error::Error;
};

// Form degree outside the range an operator is defined for.
class DegreeError : public Error {
public:
  using Error::Error;
};

// Inputs whose shape or channel layout does not match what an operation needs.
class InvalidInput : public Error {
public:
  using Error::Error;
};

// Out-of-range tuning parameter (step sizes, patch edge, tolerances, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

// An iterative solve or eigensolve failed to reach its tolerance.
class SolverError : public Error {
public:
  SolverError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

private:
  int iterations_;
  double residual_;
};

// File access and archive format problems.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace cubehodge
