#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace sparta {

/// Error classes; the numeric value doubles as the CLI exit code.
enum class ErrorKind { Parse = 1, Semantic = 2, Io = 3, Runtime = 4 };

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;

  bool operator==(const SourcePos&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<SourcePos> pos = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<SourcePos>& position() const noexcept { return pos_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::optional<SourcePos> pos_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, SourcePos pos)
      : Error(ErrorKind::Parse, message, pos) {}
};

class SemanticError : public Error {
 public:
  explicit SemanticError(const std::string& message,
                         std::optional<SourcePos> pos = std::nullopt)
      : Error(ErrorKind::Semantic, message, pos) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::Io, message) {}
};

class RuntimeError : public Error {
 public:
  explicit RuntimeError(const std::string& message)
      : Error(ErrorKind::Runtime, message) {}
};

}  // namespace sparta
