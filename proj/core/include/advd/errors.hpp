#pragma once

#include <stdexcept>
#include <string>

namespace advd {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor shape or dimensionality violation.
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration value or key.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Non-finite value where a finite one is required (loss, gradient).
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Filesystem / stream failure.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Checkpoint container violations, one kind per failure class.
struct CheckpointError : IoError {
  enum class Kind {
    bad_magic,
    bad_version,
    truncated,
    bad_shape,
    bad_kind,
    config_mismatch,
  };

  CheckpointError(Kind k, const std::string& msg) : IoError(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace advd
