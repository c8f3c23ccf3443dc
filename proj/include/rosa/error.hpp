#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rosa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedSemiringError : public Error {
public:
    using Error::Error;
};

/// A value (or sample) lies outside the value domain of a semiring.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Parallel argument lists of unequal length.
class ArityError : public Error {
public:
    using Error::Error;
};

/// identity_pairs() was handed a repeated row or column key.
class NotASelectorError : public Error {
public:
    using Error::Error;
};

/// Binary array operation on arrays built over different semirings.
class AlgebraError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public Error {
public:
    using Error::Error;
};

class NoSuchProcessError : public Error {
public:
    using Error::Error;
};

class NoSuchFileError : public Error {
public:
    using Error::Error;
};

class InvalidSizeError : public Error {
public:
    using Error::Error;
};

/// Malformed input text. `line()` is 1-based; 0 when no line applies.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace rosa
