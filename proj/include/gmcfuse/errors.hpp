#pragma once

#include <stdexcept>
#include <string>

namespace gmcfuse {

enum class ErrorCode {
  Argument = 1,
  Dimension,
  Structure,
  Config,
  Divergence,
  Diagnostic,
  Io,
};

/// Base class for every error raised by the library. The code maps 1:1 onto
/// the C API status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorCode::Argument, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::Dimension, what) {}
};

class StructureError : public Error {
 public:
  explicit StructureError(const std::string& what) : Error(ErrorCode::Structure, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ErrorCode::Divergence, what) {}
};

class DiagnosticError : public Error {
 public:
  explicit DiagnosticError(const std::string& what) : Error(ErrorCode::Diagnostic, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace gmcfuse
