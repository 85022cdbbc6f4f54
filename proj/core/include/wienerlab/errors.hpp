#pragma once

#include <stdexcept>
#include <string>

namespace wienerlab {

/// Precondition violated by an argument (bad label, mismatched dims, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A product or power would produce a chaos of order above kMaxOrder.
/// Callers are expected to lower the moment order or split the computation.
class OrderCapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Sample is (numerically) atomic, so a density-based estimate is invalid.
class DegenerateSample : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Input file or config does not match the published schema. `where()` is a
/// JSON-pointer-style location of the offending field.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace wienerlab
