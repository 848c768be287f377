#include "arise/error.hpp"

#include <utility>

namespace arise {

Error::Error(std::string stage, const std::string& message)
    : std::runtime_error(message), stage_(std::move(stage)) {}

ParseError::ParseError(const std::string& message, std::size_t line)
    : Error("parse", line == 0 ? message : "line " + std::to_string(line) + ": " + message),
      line_(line) {}

}  // namespace arise
