#pragma once

#include <stdexcept>
#include <string>

namespace dler {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPromptError : public Error {
 public:
  using Error::Error;
};

class InvalidTokenError : public Error {
 public:
  using Error::Error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Advantages, batches or gradients whose shapes disagree.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class RegistrationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class IncompatibleSnapshotError : public Error {
 public:
  using Error::Error;
};

class CheckpointFormatError : public Error {
 public:
  enum class Kind { MalformedHeader, TruncatedPayload, VersionMismatch };

  CheckpointFormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace dler
