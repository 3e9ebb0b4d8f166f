#pragma once

#include <stdexcept>
#include <string>

namespace kreisslab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Raised when a Hurwitz matrix is required. `witness` carries the offending
// abscissa, or the family parameter eta when raised from a parametric sweep.
class StabilityError : public Error {
public:
    StabilityError(const std::string& what, double witness = 0.0)
        : Error(what), witness_(witness) {}
    double witness() const noexcept { return witness_; }

private:
    double witness_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class EnumerationError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class SynthesisError : public Error {
public:
    using Error::Error;
};

class IndeterminateError : public Error {
public:
    using Error::Error;
};

} // namespace kreisslab
