#pragma once

#include <stdexcept>
#include <string>

namespace ksatom {

/// Input outside the mathematical domain of a function (negative density, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative method did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration text or flags. Carries the offending key and line (0 if from a flag).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : std::runtime_error(format(key, line, what)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string msg = "config error";
    if (line > 0) msg += " (line " + std::to_string(line) + ")";
    if (!key.empty()) msg += " at key '" + key + "'";
    return msg + ": " + what;
  }

  std::string key_;
  int line_;
};

}  // namespace ksatom
