#pragma once

#include <stdexcept>
#include <string>

namespace grsnet {

// Invalid or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An exact-enumeration request exceeds its configured budget (CLI exit code 4).
class BudgetExceeded : public std::runtime_error {
  public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace grsnet
