#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace driftlab {

/// Base of every error thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI on its error stream.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

class ConfigurationError : public Error {
public:
    explicit ConfigurationError(const std::string& what) : Error("config_error", what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("usage_error", what) {}
};

class AssemblyError : public Error {
public:
    explicit AssemblyError(const std::string& what) : Error("assembly_error", what) {}
};

class UndefinedQuotientError : public Error {
public:
    explicit UndefinedQuotientError(const std::string& what)
        : Error("undefined_quotient", what) {}
};

class DegeneracyError : public Error {
public:
    explicit DegeneracyError(const std::string& what) : Error("degeneracy_error", what) {}
};

class OracleError : public Error {
public:
    explicit OracleError(const std::string& what) : Error("oracle_error", what) {}
};

class OutOfRegimeError : public Error {
public:
    explicit OutOfRegimeError(const std::string& what) : Error("out_of_regime", what) {}
};

/// Thrown when a family is evaluated at or after the time its scale reaches zero.
class ExtinctionError : public Error {
public:
    ExtinctionError(const std::string& what, double extinction_time)
        : Error("extinction_error", what), extinction_time_(extinction_time) {}

    double extinction_time() const noexcept { return extinction_time_; }

private:
    double extinction_time_;
};

/// The closed-form eigenvalue bound is only valid before its denominator vanishes.
class HorizonError : public Error {
public:
    HorizonError(const std::string& what, double horizon)
        : Error("horizon_error", what), horizon_(horizon) {}

    double horizon() const noexcept { return horizon_; }

private:
    double horizon_;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double best_residual)
        : Error("solver_error", what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// A metric coefficient lost positivity. `node` is the flat node index on the
/// circle factor, or -1 when a line factor's scale hit zero.
class FlowBreakdownError : public Error {
public:
    FlowBreakdownError(const std::string& what, long node)
        : Error("flow_breakdown", what), node_(node) {}

    long node() const noexcept { return node_; }

private:
    long node_;
};

class StabilityError : public Error {
public:
    explicit StabilityError(const std::string& what) : Error("stability_error", what) {}
};

}  // namespace driftlab
