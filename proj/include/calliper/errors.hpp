#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calliper {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

// A non-finite value surfaced where only finite arithmetic is allowed.
// The message names the producing stage (layer, op, coordinate index).
class NonFiniteError : public Error {
public:
    using Error::Error;
};

class ConfigInvalidError : public Error {
public:
    using Error::Error;
};

// --- ingestion ---

class MissingColumnError : public Error {
public:
    explicit MissingColumnError(const std::string& column)
        : Error("missing column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class MalformedRowError : public Error {
public:
    MalformedRowError(std::size_t row, const std::string& reason)
        : Error("row " + std::to_string(row) + ": " + reason), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class EmptyFileError : public Error {
public:
    using Error::Error;
};

class RatioInvalidError : public Error {
public:
    using Error::Error;
};

// --- text providers ---

enum class ProviderErrorKind { Network, BadStatus, DimensionMismatch, MissingEntry, Other };

class ProviderFailure : public Error {
public:
    ProviderFailure(ProviderErrorKind kind, const std::string& message)
        : Error(message), kind_(kind) {}
    ProviderErrorKind kind() const { return kind_; }

private:
    ProviderErrorKind kind_;
};

class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateConflictError : public Error {
public:
    explicit DuplicateConflictError(const std::string& text)
        : Error("conflicting duplicate embedding for text: " + text) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// --- checkpoints ---

class BadMagicError : public Error {
public:
    using Error::Error;
};

class UnsupportedVersionError : public Error {
public:
    using Error::Error;
};

class TruncatedFileError : public Error {
public:
    using Error::Error;
};

class ChecksumMismatchError : public Error {
public:
    using Error::Error;
};

// --- evaluation ---

class EmptySplitError : public Error {
public:
    using Error::Error;
};

class LabelOutOfRangeError : public Error {
public:
    using Error::Error;
};

class NotADistributionError : public Error {
public:
    NotADistributionError(std::size_t row, const std::string& reason)
        : Error("row " + std::to_string(row) + ": " + reason), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class EmptyVocabularyError : public Error {
public:
    using Error::Error;
};

// --- analysis ---

class KTooLargeError : public Error {
public:
    using Error::Error;
};

class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

}  // namespace calliper
