#pragma once

#include <stdexcept>
#include <string>

namespace spca {

// Exit-code categories used by the command-line tool.
enum class ErrorKind { Config = 2, Numerical = 3, Io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double detail = 0.0)
      : Error(ErrorKind::Numerical, what), detail_(detail) {}
  // Achieved residual, condition estimate, or similar diagnostic number.
  double detail() const noexcept { return detail_; }

 private:
  double detail_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace spca
