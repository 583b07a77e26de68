#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace starqkd {

enum class ErrorCode {
  InsufficientKey,
  KeyAlreadyConsumed,
  LengthMismatch,
  WrongProvenance,
  InsufficientAuthKey,
  DomainError,
  InvalidArgument,
  MissingKey,
  ClockRegression,
  DuplicateId,
  NoBranches,
  UnknownNode,
  BadField,
  NotEnoughShares,
  MixedRounds,
  DuplicateX,
  MissingShares,
  FieldTooLarge,
  BadDimensions,
  IndexOutOfBounds,
  ScenarioInvalid,
  ParseError,
  ValidationError,
  IoError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed scenario/asset text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input that violates a constraint. The path names the field,
/// e.g. "branches[2].link.distance_km".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message);

  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace starqkd
