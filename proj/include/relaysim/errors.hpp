#pragma once

#include <stdexcept>
#include <string>

namespace relaysim {

/// Adaptive quadrature failed to reach the requested tolerance.
/// `residual` carries the achieved absolute error estimate.
struct QuadratureError : std::runtime_error {
    double residual;
    QuadratureError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual(residual) {}
};

/// Backward-induction solver failure (e.g. threshold bracket not found).
struct SolverError : std::runtime_error {
    int stage;
    SolverError(const std::string& msg, int stage)
        : std::runtime_error(msg), stage(stage) {}
};

/// Scenario/config file rejection. `line` is 1-based, 0 when not tied to a line.
struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(msg), line(line) {}
};

}  // namespace relaysim
