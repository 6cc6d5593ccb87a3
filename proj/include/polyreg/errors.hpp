#pragma once

#include <stdexcept>
#include <string>

namespace polyreg {

// Exit-code categories used by the CLI: 2 config, 3 io, 4 budget.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace polyreg
