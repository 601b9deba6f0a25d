#pragma once

#include <stdexcept>
#include <string>

namespace diffguard {

/// Bad argument to an operation (non-positive resistance, k out of range, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Malformed or unusable input data (empty signal, schema mismatch, ...).
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training data that cannot be fit (single class, non-finite values, ...).
class InvalidData : public std::runtime_error {
 public:
  explicit InvalidData(const std::string& msg) : std::runtime_error(msg) {}
};

/// A precondition on the event type or call sequence was violated.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

/// Metric requested on a class with zero samples.
class UndefinedMetric : public std::domain_error {
 public:
  explicit UndefinedMetric(const std::string& msg) : std::domain_error(msg) {}
};

/// Filesystem / serialization failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace diffguard
