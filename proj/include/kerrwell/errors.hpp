#pragma once

#include <stdexcept>
#include <string>

namespace kerrwell {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// bad input: maps to exit code 2 in the CLI
class UsageError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public UsageError {
public:
    using UsageError::UsageError;
};

class InvalidDimension : public UsageError {
public:
    using UsageError::UsageError;
};

class SignError : public UsageError {
public:
    using UsageError::UsageError;
};

class IoError : public UsageError {
public:
    using UsageError::UsageError;
};

// anything the numerics could not deliver: exit code 3
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class BistabilityLost : public NumericalFailure {
public:
    BistabilityLost(const std::string& what, double boundary)
        : NumericalFailure(what), boundary_(boundary) {}
    // drive amplitude at which the second minimum disappears (NaN if unknown)
    double boundary() const { return boundary_; }

private:
    double boundary_;
};

class DegenerateSteadyState : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class Indeterminate : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class NoDecay : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class InsufficientSupport : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class IntegrationFailure : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

} // namespace kerrwell
