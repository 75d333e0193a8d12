#pragma once

#include <stdexcept>
#include <string>

namespace spot {

// Error families. The CLI maps each family to a distinct exit code.
enum class ErrorKind {
  kShape,
  kNumeric,
  kContract,
  kFormat,
  kDimension,
  kConfig,
  kIo,
  kEmptySupport,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& m) : Error(ErrorKind::kShape, m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error(ErrorKind::kNumeric, m) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m)
      : Error(ErrorKind::kContract, m) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error(ErrorKind::kFormat, m) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m)
      : Error(ErrorKind::kDimension, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::kConfig, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorKind::kIo, m) {}
};

class EmptySupportError : public Error {
 public:
  EmptySupportError(std::size_t state, const std::string& m)
      : Error(ErrorKind::kEmptySupport, m), state_(state) {}

  std::size_t state() const noexcept { return state_; }

 private:
  std::size_t state_;
};

}  // namespace spot
