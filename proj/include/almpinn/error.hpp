#pragma once

#include <stdexcept>
#include <string>

namespace almpinn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad sizes, non-positive scale...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A value left the domain of the function applied to it (ln of x <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Misuse of an API object (non-scalar loss node, wrong tape...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Configuration file or flag could not be interpreted.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unknown problem identifier.
class UnknownProblem : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (unreadable input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Denominator of the Cole-Hopf quotient collapsed.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { kVersionMismatch, kDimensionMismatch, kCorrupt, kIo };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace almpinn
