#pragma once

#include <stdexcept>
#include <string>

namespace snls {

/// Invalid grid, solver or run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A call whose arguments are individually valid but do not fit together
/// (grid mismatch, interval out of range, missing noise path, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A non-finite value appeared while integrating.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// File I/O failure; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace snls
