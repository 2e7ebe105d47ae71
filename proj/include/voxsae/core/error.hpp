#pragma once

#include <stdexcept>
#include <string>

namespace voxsae {

// Exit-code classes used by the CLI: 1 for bad input or configuration,
// 2 for numeric failures (divergence, undefined statistics).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 1)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what, 1) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what, 1) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 1) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, 2) {}
};

}  // namespace voxsae
