#pragma once

#include <stdexcept>
#include <string>

namespace amis {

enum class ErrorKind {
  input,
  domain,
  lookup,
  capability,
  precondition,
  adaptation,
  config,
  runtime
};

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed arguments: wrong dimension, non-finite values, bad parameters.
struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::input, w) {}
};

/// A point lies outside the region where an operation is defined.
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

/// Unknown names (problem templates, density families, policy kinds).
struct LookupError : Error {
  explicit LookupError(const std::string& w) : Error(ErrorKind::lookup, w) {}
};

/// The object lacks a required capability (e.g. no envelope is available).
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& w) : Error(ErrorKind::capability, w) {}
};

/// A mathematical precondition of a bound does not hold; message names it.
struct PreconditionError : Error {
  explicit PreconditionError(const std::string& w) : Error(ErrorKind::precondition, w) {}
};

struct AdaptationError : Error {
  explicit AdaptationError(const std::string& w) : Error(ErrorKind::adaptation, w) {}
};

/// Invalid experiment configuration; message names the offending field.
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

}  // namespace amis
