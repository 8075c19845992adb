#pragma once

#include <stdexcept>
#include <string>

namespace fockwitness {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The engineered state is the zero vector (e.g. subtracting photons from vacuum).
class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// A series or cutoff search ran out of its iteration budget.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

class PoleInDenominatorParams : public Error {
 public:
  using Error::Error;
};

class ZeroMeanPhoton : public Error {
 public:
  using Error::Error;
};

class OddOrder : public Error {
 public:
  using Error::Error;
};

/// Agarwal-Tara ratio is indeterminate (denominator or moment matrix singular).
class SingularDenominator : public Error {
 public:
  using Error::Error;
};

/// The truncated Fock space would have to grow beyond the configured hard limit,
/// or a query reaches too close to the cutoff edge.
class CutoffExceeded : public Error {
 public:
  using Error::Error;
};

/// Invalid specification or configuration, detected before any computation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace fockwitness
