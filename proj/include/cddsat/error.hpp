#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cddsat {

// Base for every error the library raises on bad input or illegal state.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A container label that does not follow the column-letters + row-number form.
class LabelError : public Error {
public:
    explicit LabelError(const std::string& text)
        : Error("malformed container label '" + text + "'"), text_(text) {}

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

// Input that is well-formed but violates a precondition. `details` lists the
// offending items (labels, fields) when there is more than one.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message, std::vector<std::string> details = {})
        : Error(message), details_(std::move(details)) {}

    const std::vector<std::string>& details() const { return details_; }

private:
    std::vector<std::string> details_;
};

// Operation is not legal in the current state (e.g. resubmitting a phase).
class ConflictError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// DB-file parse failure. `offset` is the byte offset into the original text.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& expected, const std::string& message)
        : Error("offset " + std::to_string(offset) + ": " + message + " (expected " + expected + ")"),
          offset_(offset),
          expected_(expected) {}

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

}  // namespace cddsat
