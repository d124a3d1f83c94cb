#pragma once

#include <stdexcept>
#include <string>

namespace pfou {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a result of the requested quality.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Monte Carlo experiment could not be completed (too many failed replications, ...).
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pfou
