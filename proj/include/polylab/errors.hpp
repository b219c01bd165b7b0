#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polylab {

/// Input rejected by a precondition check.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A custom coefficient table that violates its declared growth envelope.
class EnvelopeError : public ValidationError {
 public:
  EnvelopeError(const std::string& what, std::size_t index)
      : ValidationError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Leading (or constant) coefficient is exactly zero where an operation needs
/// it nonzero. The caller decides whether to resample or skip.
class DegenerateCoefficientError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A floating-point result outside the range its contract allows.
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polylab
