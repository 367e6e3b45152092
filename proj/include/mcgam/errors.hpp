#pragma once

#include <stdexcept>
#include <string>

namespace mcgam {

/// Input data does not match the declared feature schema
/// (missing column, unseen category, incompatible model/data pair).
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A cell or file could not be parsed.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Post-processing detected that the edge statistics were not produced by
/// the model being transformed (rank-order mismatch).
struct ConsistencyError : std::runtime_error {
    explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mcgam
