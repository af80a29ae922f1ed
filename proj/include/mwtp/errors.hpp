#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mwtp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration: duplicate names, overlapping windows, invalid coordinates.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A payload or fixture that does not follow its documented grammar.
/// `line` is 1-based; 0 means the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(line == 0 ? what
                          : "line " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          message_(what), line_(line), column_(column) {}

    /// The description without the position prefix.
    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

/// Two payload cells claim the same (station, hour, contaminant).
class ConflictError : public ParseError {
public:
    using ParseError::ParseError;
};

/// A value reached a computation that only accepts already-validated input.
class OutOfScaleError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// Dangling location or lookup reference.
class ReferentialError : public Error {
public:
    using Error::Error;
};

class QueryError : public Error {
public:
    using Error::Error;
};

/// An existing store has tables whose columns differ from the expected schema.
class MigrationRequired : public Error {
public:
    using Error::Error;
};

class StorageUnavailable : public Error {
public:
    using Error::Error;
};

class SourceError : public Error {
public:
    using Error::Error;
};

} // namespace mwtp
