#pragma once

#include <stdexcept>
#include <string>

namespace g2f {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between operands.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of the operation (e.g. eps <= 0, r <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of the operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NotProjectableError : public Error {
 public:
  using Error::Error;
};

class NotG2FormError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Heisenberg matrix B with an odd entry; the quotient is not a lattice.
class LatticeError : public Error {
 public:
  using Error::Error;
};

}  // namespace g2f
