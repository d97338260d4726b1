#pragma once

#include <stdexcept>
#include <string>

namespace edgelab {

/// Root of every error raised by the library. The CLI maps the concrete
/// subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or precondition violation (wrong dimension, invalid id, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input parsed fine but violates a structural rule (dangling node id, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced during a computation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Training diverged.
class TrainingError : public NumericError {
public:
    TrainingError(const std::string& what, std::size_t epoch)
        : NumericError(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// A session touched a node it does not own.
class AccessDenied : public Error {
public:
    using Error::Error;
};

} // namespace edgelab
