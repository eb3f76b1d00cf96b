#pragma once

#include <stdexcept>
#include <string>

namespace nfcl {

/// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Mode root could not be bracketed or refined.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature or numerical differentiation failed its own accuracy check.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Beam energy not present in the penetration-depth table.
class UnsupportedEnergy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nfcl
