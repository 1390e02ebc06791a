#pragma once

#include <stdexcept>
#include <string>

namespace dyncal {

/// Cholesky failed even at the largest allowed jitter.
class FactorizationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. CGF at s >= s_max).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Saddlepoint equation has no sign change on the expanded search interval.
class NoBracket : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dyncal
