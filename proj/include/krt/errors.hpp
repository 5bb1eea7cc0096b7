#pragma once

#include <stdexcept>
#include <string>

namespace krt {

/// Argument outside the domain of an operation (e.g. a point outside [-1,1]^d).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A density model violated its contract (non-finite or non-positive value).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature did not converge or was asked for something it cannot integrate.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A request exceeds what the configured object supports (dimension caps, basis size).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Monotone root finding ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double lo, double hi)
        : std::runtime_error(what + " (bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "])"),
          lo_(lo),
          hi_(hi) {}

    double bracket_lo() const noexcept { return lo_; }
    double bracket_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// Least-squares rate fit on degenerate data.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace krt
