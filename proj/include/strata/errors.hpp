#pragma once

#include <stdexcept>
#include <string>

namespace strata {

// Input outside the physical or mathematical domain of an operation
// (covolume exclusion, loss of hyperbolicity, inadmissible parameters).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Failure of a numerical procedure on valid input (integrator breakdown,
// CFL violation, nonfinite state, failed self-check).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace strata
