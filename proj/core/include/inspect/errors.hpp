#pragma once

#include <stdexcept>
#include <string>

namespace inspect {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid shapes disagree, or a dimension is invalid (odd, zero).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the operation's domain (timestep range, thresholds, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A value that must be finite is NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// File system failures: missing files, unreadable directories, short writes.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class CountMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace inspect
