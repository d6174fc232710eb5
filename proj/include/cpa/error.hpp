#ifndef CPA_ERROR_HPP
#define CPA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cpa {

// Malformed input: bad parameters, dimension mismatch, schema violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation would exceed the configured support cap or coordinate range.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A series or root search could not be certified (divergence, bracket failure).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpa

#endif  // CPA_ERROR_HPP
