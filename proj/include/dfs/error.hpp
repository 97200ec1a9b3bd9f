#pragma once

#include <stdexcept>
#include <string>

namespace dfs {

// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  kInput = 2,       // missing files, schema violations, bad preconditions
  kInfeasible = 3,  // no lineup satisfies the contest rules
  kNumeric = 4,     // divergence, undefined statistics
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::kInput, what) {}
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& column,
             const std::string& message)
      : InputError(file + ":" + std::to_string(line) + ": column '" + column +
                   "': " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

}  // namespace dfs
