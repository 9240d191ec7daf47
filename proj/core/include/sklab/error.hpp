#pragma once

#include <stdexcept>
#include <string>

namespace sklab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A requested computation exceeds a size cap or memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared while evaluating an integrand.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Two routes that must agree did not, or an invariant broke numerically.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace sklab
