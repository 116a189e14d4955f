#pragma once

#include <stdexcept>
#include <string>

namespace bilstab {

/// Invalid user-supplied parameter; the message names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Mismatched space / state / dual representations.
class StructuralError : public std::logic_error {
 public:
  explicit StructuralError(const std::string& what) : std::logic_error(what) {}
};

/// Operation not defined for the model's norm structure
/// (e.g. Hilbert-only kernel projections on L1 / sup-norm models).
class UnsupportedStructureError : public std::logic_error {
 public:
  explicit UnsupportedStructureError(const std::string& what) : std::logic_error(what) {}
};

/// Requested evolution outside the semigroup's time domain.
class TimeDomainError : public std::domain_error {
 public:
  explicit TimeDomainError(const std::string& what) : std::domain_error(what) {}
};

/// Non-finite state encountered while stepping; carries the last time at
/// which the state was still finite.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Too few samples for the requested statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal numerical failure (non-convergent root find, step budget, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bilstab
