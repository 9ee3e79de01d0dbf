#pragma once

#include <stdexcept>
#include <string>

namespace parametrix {

// Invalid argument or a state outside the family's state space.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedOrderError : public DomainError {
public:
    using DomainError::DomainError;
};

// Syntax error in a coefficient expression; `position` is a 0-based byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A coefficient field failed its validation sweep.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature ran out of panels before reaching its tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate_(estimate), error_(error_estimate) {}
    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

// Raised by simulation or comparison code when a plan exceeds its budget,
// or when a density grid does not cover enough mass.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CoverageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace parametrix
