#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bes {

/// Malformed expression text. `offset` is the byte position in the source.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Expression evaluation failure: unbound parameter, domain error (log of a
/// nonpositive value, division by zero), or a non-finite intermediate.
/// Carries the byte offset of the offending node in the original source.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string &msg, std::size_t offset)
        : std::runtime_error(msg + " (node at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Rejected input: a constraint on a query, config field, or precondition failed.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not deliver its contract (non-convergence,
/// infeasible certificate, nonpositive weight, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem / serialization failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bes
