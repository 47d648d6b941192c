#pragma once

#include <stdexcept>
#include <string>

namespace xfrag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in an XML document or workload script, with source position.
class ParseError : public Error {
public:
    ParseError(std::string source, int line, int col, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what),
          source_(std::move(source)),
          line_(line),
          col_(col) {}

    const std::string& source() const noexcept { return source_; }
    int line() const noexcept { return line_; }
    int col() const noexcept { return col_; }

private:
    std::string source_;
    int line_ = 0;
    int col_ = 0;
};

/// A name that does not resolve against warehouse metadata, or a literal
/// that cannot be coerced to the declared attribute type.
class BindError : public Error {
public:
    using Error::Error;
};

/// Referential-integrity violation (dangling reference, broken hierarchy,
/// inconsistent fragment documents).
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Invalid argument to an operation (bad k, bad size list, guard violation).
class ParamError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Conflicting value types on one attribute.
class TypeError : public Error {
public:
    using Error::Error;
};

}  // namespace xfrag
