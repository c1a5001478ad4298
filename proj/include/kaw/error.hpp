#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kaw {

// Base of every error raised by the library. category() is a stable,
// machine-readable token printed by the CLI on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    [[nodiscard]] const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

#define KAW_DEFINE_ERROR(Name)                                                   \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(#Name, what) {}           \
    };

KAW_DEFINE_ERROR(OutOfDomain)
KAW_DEFINE_ERROR(InvalidCell)
KAW_DEFINE_ERROR(UndeclaredName)
KAW_DEFINE_ERROR(ValidationError)
KAW_DEFINE_ERROR(CacheError)
KAW_DEFINE_ERROR(UnsupportedObjective)
KAW_DEFINE_ERROR(InitialStateOutsideDomain)
KAW_DEFINE_ERROR(InitialStateNotWinning)
KAW_DEFINE_ERROR(IoError)

#undef KAW_DEFINE_ERROR

// Raised by the formula parsers. position is a 0-based offset into the text.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t position)
        : Error("SyntaxError", what + " at position " + std::to_string(position)),
          position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Raised while reading scenario files; line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error("ParseError",
                what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace kaw
