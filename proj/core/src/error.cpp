#include "starqkd/error.hpp"

#include <utility>

namespace starqkd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InsufficientKey: return "InsufficientKey";
    case ErrorCode::KeyAlreadyConsumed: return "KeyAlreadyConsumed";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::WrongProvenance: return "WrongProvenance";
    case ErrorCode::InsufficientAuthKey: return "InsufficientAuthKey";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::ClockRegression: return "ClockRegression";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NoBranches: return "NoBranches";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::BadField: return "BadField";
    case ErrorCode::NotEnoughShares: return "NotEnoughShares";
    case ErrorCode::MixedRounds: return "MixedRounds";
    case ErrorCode::DuplicateX: return "DuplicateX";
    case ErrorCode::MissingShares: return "MissingShares";
    case ErrorCode::FieldTooLarge: return "FieldTooLarge";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error(ErrorCode::ParseError,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::string path, const std::string& message)
    : Error(ErrorCode::ValidationError, path + ": " + message), path_(std::move(path)) {}

}  // namespace starqkd
