#pragma once

#include <stdexcept>
#include <string>

namespace btfuzz {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Marker extraction eroded every foreground component away.
class NoInternalMarker : public Error {
 public:
  NoInternalMarker() : Error("no internal marker survives erosion") {}
};

/// FIS file diagnostic carrying a 1-based source position.
class FisParseError : public Error {
 public:
  FisParseError(int line, int column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column),
        message_(message) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

}  // namespace btfuzz
