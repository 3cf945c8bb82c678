#pragma once

#include <stdexcept>
#include <string>

namespace xdv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    ParseError(const std::string& what, int line = 0, int column = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ", col " + std::to_string(column) + ": " + what : what),
          line(line), column(column) {}
    int line;
    int column;
};

struct ValidationError : Error {
    using Error::Error;
};

/// A truncated series lost every coefficient of its window.
struct PrecisionError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

/// Development hit the configuration where the fourth point leaves C[[t]].
struct DevelopError : Error {
    using Error::Error;
};

struct PoleError : Error {
    using Error::Error;
};

struct SolveError : Error {
    using Error::Error;
};

} // namespace xdv
