#pragma once

#include <optional>
#include <string>

#include "starqkd/error.hpp"

namespace starqkd::test {

/// Code of the starqkd::Error thrown by f, or nullopt if it returns normally.
template <typename F>
std::optional<ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string scenario_path(const std::string& name) {
  return std::string(STARQKD_SCENARIO_DIR) + "/" + name;
}

}  // namespace starqkd::test
