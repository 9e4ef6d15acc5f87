#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bufsim {

/// A caller broke a documented precondition (unsorted trace, mismatched
/// summaries, invalid parameters). Maps to CLI exit code 1.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed trace or config text. `line()` is 1-based; 0 when the error is
/// not tied to a particular line (e.g. empty input).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// File could not be opened, read or written. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    IoError(std::string path, const std::string& what);

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace bufsim
