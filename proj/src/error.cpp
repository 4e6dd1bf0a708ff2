#include "sparta/error.hpp"

namespace sparta {

namespace {

std::string decorate(const std::string& message, const std::optional<SourcePos>& pos) {
  if (!pos) return message;
  return std::to_string(pos->line) + ":" + std::to_string(pos->column) + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<SourcePos> pos)
    : std::runtime_error(decorate(message, pos)), kind_(kind), pos_(pos) {}

}  // namespace sparta
