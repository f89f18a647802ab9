#ifndef ETFP_ERRORS_HPP_
#define ETFP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace etfp {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A size guard was exceeded (enumeration counts, Hadamard orders, ...).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Text input could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input parsed but violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace etfp

#endif  // ETFP_ERRORS_HPP_
