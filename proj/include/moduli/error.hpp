#pragma once

#include <stdexcept>
#include <string>

namespace moduli {

// Base for all library failures. Each subclass carries a fixed message
// prefix so callers (and the CLI) can report the failure category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error("dimension mismatch: " + what) {}
};

class InvalidBasisError : public Error {
public:
    explicit InvalidBasisError(const std::string& what) : Error("invalid basis: " + what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

class SingularJacobianError : public Error {
public:
    SingularJacobianError() : Error("slice chart not invertible here") {}
};

class OutsideChartError : public Error {
public:
    explicit OutsideChartError(double residual)
        : Error("outside local chart (Newton residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    [[nodiscard]] double residual() const { return residual_; }

private:
    double residual_;
};

class NotContactError : public Error {
public:
    explicit NotContactError(const std::string& what) : Error("not contact: " + what) {}
};

class NotPositiveContactError : public Error {
public:
    explicit NotPositiveContactError(const std::string& what) : Error("not positive contact: " + what) {}
};

class ConfigurationError : public Error {
public:
    explicit ConfigurationError(const std::string& what) : Error("configuration error: " + what) {}
};

class RestrictedScopeError : public Error {
public:
    explicit RestrictedScopeError(const std::string& what) : Error("restricted scope: " + what) {}
};

} // namespace moduli
