#pragma once

#include <stdexcept>
#include <string>

namespace exeng {

// Bad user-supplied input: malformed files, out-of-range config values,
// inconsistent grids.  CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Physically meaningless request: query outside a map's hull, temperature
// outside a property fit, log of a vanished mole fraction.  Exit code 3.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Integration blew up (negative T or p, NaN state).  Exit code 4.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solve ran out of iterations.  Exit code 4.
class ConvergenceError : public NumericalError {
public:
    explicit ConvergenceError(const std::string& what) : NumericalError(what) {}
};

} // namespace exeng
