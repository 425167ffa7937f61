#pragma once

#include <stdexcept>
#include <string>

namespace fracvisco {

/// Argument outside the mathematical domain of a function or model
/// (poles, invalid fractional orders, t <= 0 for singular kernels).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data (CSV schema, non-monotone time,
/// nonpositive area, protocol violations).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Interpolation or evaluation requested outside the available range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Invalid configuration of a solver, optimizer, or command.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A fit could not produce a finite optimum.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracvisco
