#pragma once

#include <stdexcept>
#include <string>

namespace girsanov {

/// Sizes of m, q, k (or of a state function) do not agree.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The model violates a semantic requirement (detailed balance, sign constraints).
class InvalidModel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A transform is not admissible for the model (rho <= 0, phi <= -1, gamma inconsistency ...).
class InvalidTransform : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The integrability gate of a multiplicative functional failed along a path.
class IntegrabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (t beyond horizon, x == y in the kernel ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace girsanov
