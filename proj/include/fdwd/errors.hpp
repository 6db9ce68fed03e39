#pragma once

#include <stdexcept>
#include <string>

namespace fdwd {

// Base of every library error. Two families are distinguished by the CLI:
// IoError (exit 2) and everything derived from ValidationError (exit 3);
// SolverSingular maps to exit 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class InvalidGrid : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfDomain : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidData : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotSymmetric : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateLabels : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CovariateMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class StratificationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ModelFormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SolverSingular : public Error {
public:
    using Error::Error;
};

}  // namespace fdwd
