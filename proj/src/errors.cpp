#include "bergman/errors.hpp"

namespace bergman {

namespace {

std::string located(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0 && column == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(located(what, line, column)), line_(line), column_(column) {}

}  // namespace bergman
