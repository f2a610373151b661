#pragma once

#include <stdexcept>
#include <string>

namespace magnomech {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition violated by the caller (dimension mismatch and the like).
class ContractError : public Error {
public:
    using Error::Error;
};

// Non-finite values or derivative depth exhausted.
class NumericError : public Error {
public:
    using Error::Error;
};

// Singular matrix, incompatible frame, rank loss.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

// Scenario file could not be tokenized/parsed; carries line/column.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(col) + ")"),
          line_(line), col_(col) {}
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_;
    int col_;
};

// Scenario parsed but violates the schema; carries the offending field path.
class SchemaError : public Error {
public:
    SchemaError(const std::string& msg, std::string field)
        : Error(msg + " [field: " + field + "]"), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace magnomech
