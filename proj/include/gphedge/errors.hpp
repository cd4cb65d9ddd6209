#pragma once

#include <stdexcept>
#include <string>

namespace gphedge {

/// Caller supplied something outside an operation's contract
/// (dimension mismatch, out-of-box point, non-finite reward, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Floating-point failure that cannot be repaired locally
/// (Cholesky breakdown after jitter escalation, non-finite objective values).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gphedge
