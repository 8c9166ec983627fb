#pragma once

#include <stdexcept>
#include <string>

namespace cqwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (shape mismatch, bad bookkeeping).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Frequency lies on or near a singularity of the solution operator.
class NearPoleError : public Error {
 public:
  using Error::Error;
};

/// Runge-Kutta stage matrix is not diagonalizable at the requested node.
class DefectivePointError : public Error {
 public:
  using Error::Error;
};

/// Linear system is singular to working precision.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double rcond)
      : Error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Malformed input file; line is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Mesh fails a geometric requirement (degenerate panel, open surface).
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Series or iteration failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cqwave
