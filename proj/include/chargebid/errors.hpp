#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chargebid {

/// Bad input data or configuration; the caller can fix it. Maps to exit code 2 in the CLI.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content. Carries a 1-based line number when known (0 = unknown).
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : InputError(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A broken internal invariant. Maps to exit code 4 in the CLI.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace chargebid
