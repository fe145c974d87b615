// errors.hpp: exception types shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace tempo {

// Shapes or extents do not match.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (negative frequency, pole, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numerical failure: non-finite input, SVD non-convergence, quadrature that misses its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent inputs across modules (grid or eigenbasis mismatch, bad insertion schedule).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested closed form does not exist for the given bath model.
class UnsupportedModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace tempo
