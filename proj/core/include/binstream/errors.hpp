#pragma once

#include <stdexcept>
#include <string>

namespace binstream {

/// Invalid model parameters (alpha/beta range, c/tau range, xi range, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Mismatched vector or matrix dimensions.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Violated precondition on structured input, e.g. a partition that is not
/// a coarsening of its predecessor.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Singular systems and iterative methods that fail to converge.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed stream input (value out of range, stream longer than n).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace binstream
