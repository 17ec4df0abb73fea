#pragma once

#include <stdexcept>
#include <string>

namespace cxls {

// Failure classes. The CLI maps each one onto its own exit code, so every
// throw site names the offending field at the start of the message.

/// Malformed input text (bad JSON, bad grid syntax, unknown kind).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value parsed fine but breaks a type invariant (weights do not sum to 1,
/// slopes increase, lambda outside [0,1], ...).
class InvariantError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver did not terminate, or a sum overflowed.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The operation is not applicable to this input (e.g. reconstructing a loss
/// function for the essential infimum).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace cxls
