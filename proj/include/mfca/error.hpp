#pragma once

#include <stdexcept>
#include <string>

namespace mfca {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments outside an operation's domain (bad index, size mismatch, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Requested size beyond what the implementation supports (e.g. weight > 64).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Alignment between frames whose viewing directions are antipodal.
class AntipodalError : public Error {
 public:
  using Error::Error;
};

// Iterative eigensolver hit its restart cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfca
