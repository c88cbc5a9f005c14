#pragma once

#include <stdexcept>
#include <string>

namespace gnas {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input documents: bad JSON shape, wrong matrix size, bad config keys.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Structurally well-formed input that violates a domain invariant
/// (cyclic topology, accuracy out of range, duplicate benchmark key).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A name or key that does not resolve against a registry or table.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Lookup of a key that is absent from a benchmark table.
class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& key)
      : Error("key not found in benchmark table: " + key), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Bad or missing configuration (including missing API key env vars).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Network/transport failure after retries, or an exhausted playback script.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A generation or sweep request that exceeds a configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gnas
